//! Switch-level simulation.
//!
//! Each CNFET is a conditional switch. A channel passes a level `L` when the
//! device conducts with `L` on its source side, so n-type devices pass low
//! levels well and p-type devices pass high levels well. Levels propagate
//! from fixed nodes (supplies, sources, inputs) through conducting channels.
//! Nodes reached by more than one level resolve to `X`. Nodes that no channel
//! drives but that sit on capacitors take the capacitance-weighted mean of
//! their neighbours.
//!
//! The solver relaxes the whole circuit until no node changes. Updates are
//! computed from the previous sweep only, so results do not depend on the
//! order devices were declared in.

mod export;
mod steady;
mod timing;
mod transient;

use std::fmt;

use thiserror::Error;

use crate::netlist::SemanticError;

pub use export::{waveform_csv, waveform_vcd};
pub use steady::{steady_state, Circuit, Resolved};
pub use timing::delay_estimate;
pub use transient::{measure, measure_nodes, transient, Event, Metrics, Stimulus, Waveform};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("no fixpoint after {0} relaxation sweeps")]
    NonConvergent(usize),
    #[error("input node `{0}` has no value")]
    MissingInput(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` is fixed to two different voltages")]
    SourceConflict(String),
    #[error("output `{0}` is never driven through a channel")]
    NoPath(String),
    #[error("stimulus times must be strictly increasing")]
    BadSchedule,
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Netlist(#[from] SemanticError),
    #[error("at t = {time:e} s: {source}")]
    At { time: f64, source: Box<SimError> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub vdd: f64,
    pub max_iterations: usize,
    /// On resistance of one tube (Ω).
    pub r_on_per_tube: f64,
    /// Load on every probed output (F).
    pub c_out_load: f64,
    /// Voltage-to-trit tolerance; `vdd / 10` when unset.
    pub level_tolerance: Option<f64>,
    /// Gate capacitance contributed per tube to the node driving it (F).
    pub c_gate_per_tube: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            vdd: 0.9,
            max_iterations: 64,
            r_on_per_tube: 30e3,
            c_out_load: 1e-15,
            level_tolerance: None,
            c_gate_per_tube: 10e-18,
        }
    }
}

impl SimConfig {
    pub fn tolerance(&self) -> f64 {
        self.level_tolerance.unwrap_or(self.vdd / 10.0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("vdd", self.vdd),
            ("r_on_per_tube", self.r_on_per_tube),
            ("c_out_load", self.c_out_load),
            ("level_tolerance", self.tolerance()),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(SimError::BadConfig(format!("{name} must be positive")));
        }
        if !(self.c_gate_per_tube >= 0.0 && self.c_gate_per_tube.is_finite()) {
            return Err(SimError::BadConfig(
                "c_gate_per_tube must be non-negative".into(),
            ));
        }
        if self.max_iterations < 8 {
            return Err(SimError::BadConfig(
                "max_iterations must be at least 8".into(),
            ));
        }
        Ok(())
    }
}

/// Node voltage, contention, or floating with no history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Volts(f64),
    X,
    Z,
}

impl Level {
    pub fn volts(self) -> Option<f64> {
        match self {
            Level::Volts(v) => Some(v),
            _ => None,
        }
    }

    fn close_to(self, other: Level) -> bool {
        match (self, other) {
            (Level::Volts(a), Level::Volts(b)) => (a - b).abs() <= LEVEL_EPS,
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Volts(v) => write!(f, "{v}"),
            Level::X => f.write_str("x"),
            Level::Z => f.write_str("z"),
        }
    }
}

/// Two voltages closer than this are the same level.
pub(crate) const LEVEL_EPS: f64 = 1e-12;

/// Drive strength, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strength {
    Charged,
    Driven,
    Supply,
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strength::Charged => "charged",
            Strength::Driven => "driven",
            Strength::Supply => "supply",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signal {
    pub level: Level,
    pub strength: Strength,
}

impl Signal {
    pub const FLOATING: Signal = Signal {
        level: Level::Z,
        strength: Strength::Charged,
    };

    pub fn new(level: Level, strength: Strength) -> Self {
        Self { level, strength }
    }

    fn same(&self, other: &Signal) -> bool {
        self.strength == other.strength && self.level.close_to(other.level)
    }
}
