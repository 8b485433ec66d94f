//! Switch-level simulation and verification of CNFET ternary full adders.
//!
//! - [`devmodel`]: chirality, diameter and threshold-voltage calculators.
//! - [`ternary`]: trits, the voltage map and the arithmetic oracle.
//! - [`cells`]: behavioral ternary cells and the two adder designs.
//! - [`netlist`]: the `.tnl` text format and the built-in circuit library.
//! - [`sim`]: steady-state solver, transient engine and RC timing.
//! - [`bench`]: truth-table checks and parameter sweeps behind the CLI.

pub mod bench;
pub mod cells;
pub mod devmodel;
pub mod netlist;
pub mod sim;
pub mod ternary;
