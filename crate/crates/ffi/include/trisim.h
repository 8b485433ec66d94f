#ifndef TRISIM_H
#define TRISIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Kind of a resolved node level.
 */
typedef enum TrisimLevel {
  TRISIM_LEVEL_VOLTS = 0,
  TRISIM_LEVEL_CONTENTION = 1,
  TRISIM_LEVEL_FLOATING = 2,
} TrisimLevel;

typedef enum TrisimStatus {
  TRISIM_STATUS_OK = 0,
  TRISIM_STATUS_NULL_POINTER = 1,
  TRISIM_STATUS_INVALID_UTF8 = 2,
  TRISIM_STATUS_INVALID_ARGUMENT = 3,
  TRISIM_STATUS_PARSE = 4,
  TRISIM_STATUS_DEVICE = 5,
  TRISIM_STATUS_CONFIG = 6,
  TRISIM_STATUS_SIMULATION = 7,
  TRISIM_STATUS_NON_CONVERGENT = 8,
  TRISIM_STATUS_PANIC = 9,
} TrisimStatus;

/**
 * Opaque parsed netlist.
 */
typedef struct TrisimNetlist TrisimNetlist;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *trisim_last_error(void);

/**
 * Library version as a static string.
 */
const char *trisim_version(void);

/**
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void trisim_string_free(char *s);

/**
 * Parses `.tnl` text into a new handle.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is valid for one write.
 */
enum TrisimStatus trisim_netlist_parse(const char *text, struct TrisimNetlist **out);

/**
 * Builds a bundled netlist (`design1`, `design2`, `sti`, `nti`, `pti`, `stb`, `tgate`) at `vdd`.
 *
 * # Safety
 * `name` is a NUL-terminated string; `out` is valid for one write.
 */
enum TrisimStatus trisim_netlist_builtin(const char *name, double vdd, struct TrisimNetlist **out);

/**
 * # Safety
 * `n` is null or a handle from this library that has not been freed.
 */
void trisim_netlist_free(struct TrisimNetlist *n);

/**
 * Canonical text of `n`; free with [`trisim_string_free`].
 *
 * # Safety
 * `n` is a live handle; `out` is valid for one write.
 */
enum TrisimStatus trisim_netlist_serialize(const struct TrisimNetlist *n, char **out);

/**
 * Number of CNFETs after flattening.
 *
 * # Safety
 * `n` is a live handle; `out` is valid for one write.
 */
enum TrisimStatus trisim_netlist_cnfet_count(const struct TrisimNetlist *n, size_t *out);

/**
 * Settles `n` with `count` inputs given as parallel `names`/`volts` arrays
 * and reports the level of `node`. `out_volts` is written only when
 * `out_kind` is `TRISIM_LEVEL_VOLTS`.
 *
 * # Safety
 * `names` and `volts` point to `count` elements (may be null when `count`
 * is 0); every name is a NUL-terminated string; `n` is a live handle;
 * `node` is a NUL-terminated string; out pointers are valid for one write.
 */
enum TrisimStatus trisim_netlist_steady_state(const struct TrisimNetlist *n,
                                              const char *const *names,
                                              const double *volts,
                                              size_t count,
                                              double vdd,
                                              const char *node,
                                              enum TrisimLevel *out_kind,
                                              double *out_volts);

/**
 * Worst-case RC delay to `output` in seconds.
 *
 * # Safety
 * `n` is a live handle; `output` is a NUL-terminated string; `out` is valid
 * for one write.
 */
enum TrisimStatus trisim_netlist_delay(const struct TrisimNetlist *n,
                                       const char *output,
                                       double vdd,
                                       double load,
                                       double *out);

/**
 * Arithmetic full add of three trits (0, 1 or 2).
 *
 * # Safety
 * Out pointers are valid for one write.
 */
enum TrisimStatus trisim_full_add(uint8_t a, uint8_t b, uint8_t cin, uint8_t *sum, uint8_t *cout);

/**
 * Behavioral model of adder `design` (1 or 2) at supply `vdd`.
 *
 * # Safety
 * Out pointers are valid for one write.
 */
enum TrisimStatus trisim_adder_eval(uint32_t design,
                                    uint8_t a,
                                    uint8_t b,
                                    uint8_t cin,
                                    double vdd,
                                    uint8_t *sum,
                                    uint8_t *cout);

/**
 * Nanotube diameter in nm.
 *
 * # Safety
 * `out` is valid for one write.
 */
enum TrisimStatus trisim_cnt_diameter(uint32_t n1, uint32_t n2, double *out);

/**
 * Threshold voltage in volts; `TRISIM_STATUS_DEVICE` for metallic tubes.
 *
 * # Safety
 * `out` is valid for one write.
 */
enum TrisimStatus trisim_threshold_voltage(uint32_t n1, uint32_t n2, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRISIM_H */
