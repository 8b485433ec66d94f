//! C ABI for the trisim simulator.
//!
//! Every fallible call returns a [`TrisimStatus`]; results go through out
//! pointers. On failure, [`trisim_last_error`] returns a message for the
//! calling thread. Netlists are opaque [`TrisimNetlist`] handles released with
//! [`trisim_netlist_free`]; strings returned by the library are released with
//! [`trisim_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trisim::cells::{adder_eval_at, AdderDesign, Variant};
use trisim::devmodel::{cnt_diameter, threshold_voltage, Chirality, DeviceError};
use trisim::netlist::{builtin, parse, serialize, DesignConfig, Netlist};
use trisim::sim::{Circuit, Level, SimConfig, SimError};
use trisim::ternary::{full_add, Trit, VoltageMap};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrisimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Device = 5,
    Config = 6,
    Simulation = 7,
    NonConvergent = 8,
    Panic = 9,
}

/// Kind of a resolved node level.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrisimLevel {
    Volts = 0,
    Contention = 1,
    Floating = 2,
}

/// Opaque parsed netlist.
pub struct TrisimNetlist {
    netlist: Netlist,
    circuit: Circuit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TrisimStatus, String);

impl Failure {
    fn new(status: TrisimStatus, msg: impl ToString) -> Self {
        Self(status, msg.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::NonConvergent(_) => TrisimStatus::NonConvergent,
            SimError::Netlist(_) => TrisimStatus::Parse,
            SimError::MissingInput(_) | SimError::UnknownNode(_) | SimError::BadConfig(_) => {
                TrisimStatus::InvalidArgument
            }
            _ => TrisimStatus::Simulation,
        };
        Self(status, e.to_string())
    }
}

impl From<DeviceError> for Failure {
    fn from(e: DeviceError) -> Self {
        Self::new(TrisimStatus::Device, e)
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TrisimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TrisimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TrisimStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure::new(TrisimStatus::NullPointer, "null pointer argument")
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(TrisimStatus::InvalidUtf8, e))
}

/// # Safety
/// `out` is null or valid for one write.
unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn trit(v: u8) -> Result<Trit, Failure> {
    Trit::try_from(v).map_err(|e| Failure::new(TrisimStatus::InvalidArgument, e))
}

fn variant(design: u32) -> Result<Variant, Failure> {
    match design {
        1 => Ok(Variant::Design1),
        2 => Ok(Variant::Design2),
        _ => Err(Failure::new(
            TrisimStatus::InvalidArgument,
            format!("design must be 1 or 2, got {design}"),
        )),
    }
}

fn sim_config(vdd: f64, load: f64) -> Result<SimConfig, Failure> {
    let cfg = SimConfig {
        vdd,
        c_out_load: load,
        ..SimConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn handle(netlist: Netlist) -> Result<*mut TrisimNetlist, Failure> {
    let circuit = Circuit::new(&netlist)?;
    Ok(Box::into_raw(Box::new(TrisimNetlist { netlist, circuit })))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn trisim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn trisim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trisim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `.tnl` text into a new handle.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_parse(
    text: *const c_char,
    out: *mut *mut TrisimNetlist,
) -> TrisimStatus {
    guard(|| {
        let text = read_str(text)?;
        let n = parse(text).map_err(|e| Failure::new(TrisimStatus::Parse, e))?;
        write(out, handle(n)?)
    })
}

/// Builds a bundled netlist (`design1`, `design2`, `sti`, `nti`, `pti`, `stb`, `tgate`) at `vdd`.
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_builtin(
    name: *const c_char,
    vdd: f64,
    out: *mut *mut TrisimNetlist,
) -> TrisimStatus {
    guard(|| {
        let name = read_str(name)?;
        let n = builtin(name, &DesignConfig::at_vdd(vdd))
            .ok_or_else(|| {
                Failure::new(
                    TrisimStatus::InvalidArgument,
                    format!("no bundled netlist `{name}`"),
                )
            })?
            .map_err(|e| Failure::new(TrisimStatus::Config, e))?;
        write(out, handle(n)?)
    })
}

/// # Safety
/// `n` is null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_free(n: *mut TrisimNetlist) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// Canonical text of `n`; free with [`trisim_string_free`].
///
/// # Safety
/// `n` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_serialize(
    n: *const TrisimNetlist,
    out: *mut *mut c_char,
) -> TrisimStatus {
    guard(|| {
        let n = n.as_ref().ok_or_else(null)?;
        let text = CString::new(serialize(&n.netlist))
            .map_err(|e| Failure::new(TrisimStatus::InvalidUtf8, e))?;
        write(out, text.into_raw())
    })
}

/// Number of CNFETs after flattening.
///
/// # Safety
/// `n` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_cnfet_count(
    n: *const TrisimNetlist,
    out: *mut usize,
) -> TrisimStatus {
    guard(|| {
        let n = n.as_ref().ok_or_else(null)?;
        write(out, n.circuit.fets().len())
    })
}

/// Settles `n` with `count` inputs given as parallel `names`/`volts` arrays
/// and reports the level of `node`. `out_volts` is written only when
/// `out_kind` is `TRISIM_LEVEL_VOLTS`.
///
/// # Safety
/// `names` and `volts` point to `count` elements (may be null when `count`
/// is 0); every name is a NUL-terminated string; `n` is a live handle;
/// `node` is a NUL-terminated string; out pointers are valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_steady_state(
    n: *const TrisimNetlist,
    names: *const *const c_char,
    volts: *const f64,
    count: usize,
    vdd: f64,
    node: *const c_char,
    out_kind: *mut TrisimLevel,
    out_volts: *mut f64,
) -> TrisimStatus {
    guard(|| {
        let n = n.as_ref().ok_or_else(null)?;
        let node = read_str(node)?;
        let mut inputs = BTreeMap::new();
        if count > 0 {
            if names.is_null() || volts.is_null() {
                return Err(null());
            }
            let names = std::slice::from_raw_parts(names, count);
            let volts = std::slice::from_raw_parts(volts, count);
            for (&name, &v) in names.iter().zip(volts) {
                inputs.insert(read_str(name)?.to_string(), v);
            }
        }
        let r = n
            .circuit
            .steady_state(&inputs, &sim_config(vdd, SimConfig::default().c_out_load)?)?;
        let s = r
            .get(node)
            .ok_or_else(|| Failure::from(SimError::UnknownNode(node.to_string())))?;
        match s.level {
            Level::Volts(v) => {
                write(out_kind, TrisimLevel::Volts)?;
                write(out_volts, v)
            }
            Level::X => write(out_kind, TrisimLevel::Contention),
            Level::Z => write(out_kind, TrisimLevel::Floating),
        }
    })
}

/// Worst-case RC delay to `output` in seconds.
///
/// # Safety
/// `n` is a live handle; `output` is a NUL-terminated string; `out` is valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_netlist_delay(
    n: *const TrisimNetlist,
    output: *const c_char,
    vdd: f64,
    load: f64,
    out: *mut f64,
) -> TrisimStatus {
    guard(|| {
        let n = n.as_ref().ok_or_else(null)?;
        let output = read_str(output)?;
        let d = n.circuit.delay_estimate(output, &sim_config(vdd, load)?)?;
        write(out, d)
    })
}

/// Arithmetic full add of three trits (0, 1 or 2).
///
/// # Safety
/// Out pointers are valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_full_add(
    a: u8,
    b: u8,
    cin: u8,
    sum: *mut u8,
    cout: *mut u8,
) -> TrisimStatus {
    guard(|| {
        let (s, c) = full_add(trit(a)?, trit(b)?, trit(cin)?);
        write(sum, s.value())?;
        write(cout, c.value())
    })
}

/// Behavioral model of adder `design` (1 or 2) at supply `vdd`.
///
/// # Safety
/// Out pointers are valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_adder_eval(
    design: u32,
    a: u8,
    b: u8,
    cin: u8,
    vdd: f64,
    sum: *mut u8,
    cout: *mut u8,
) -> TrisimStatus {
    guard(|| {
        let d = AdderDesign::new(variant(design)?);
        let m = VoltageMap::new(vdd).map_err(|e| Failure::new(TrisimStatus::InvalidArgument, e))?;
        let (s, c) = adder_eval_at(&d, trit(a)?, trit(b)?, trit(cin)?, &m);
        write(sum, s.value())?;
        write(cout, c.value())
    })
}

/// Nanotube diameter in nm.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_cnt_diameter(n1: u32, n2: u32, out: *mut f64) -> TrisimStatus {
    guard(|| write(out, cnt_diameter(Chirality::new(n1, n2)?)))
}

/// Threshold voltage in volts; `TRISIM_STATUS_DEVICE` for metallic tubes.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn trisim_threshold_voltage(n1: u32, n2: u32, out: *mut f64) -> TrisimStatus {
    guard(|| write(out, threshold_voltage(Chirality::new(n1, n2)?)?))
}
