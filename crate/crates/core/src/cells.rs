//! Behavioral ternary cells and the two band-selector full adders.
//!
//! Both adders share one structure. Three equal input capacitors average the
//! inputs onto a sum node at `sigma * vdd / 6`. A two-threshold carry
//! generator classifies that voltage into `cout`, which in turn drives the
//! `s`/`f` selectors. Exactly one of three sum paths is then enabled:
//!
//! * band 0 (`sigma` in 0..=2): the band-0 cell passes `sigma` through.
//! * band 1 (`sigma` in 3..=5): the band-1 cell maps 3, 4, 5 onto 0, 1, 2.
//! * band 2 (`sigma == 6`): an n-type pull-down forces `sum` to 0.
//!
//! The designs differ only in how the selected band output reaches `sum`.
//! Design 1 restores it through two cascaded standard inverters; design 2
//! uses a single ternary buffer.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ternary::{full_add, Trit, VoltageMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error("{0} is not a single-trit cell")]
    WrongArity(TernaryCellKind),
    #[error("input {input} is outside the domain of {kind}")]
    OutOfDomain { kind: TernaryCellKind, input: u32 },
    #[error("unknown cell kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TernaryCellKind {
    Sti,
    Nti,
    Pti,
    Stb,
    Tgate,
    StiBand0,
    StiBand1,
    CarryGen,
    PulldownN,
}

impl TernaryCellKind {
    pub const ALL: [TernaryCellKind; 9] = [
        Self::Sti,
        Self::Nti,
        Self::Pti,
        Self::Stb,
        Self::Tgate,
        Self::StiBand0,
        Self::StiBand1,
        Self::CarryGen,
        Self::PulldownN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sti => "STI",
            Self::Nti => "NTI",
            Self::Pti => "PTI",
            Self::Stb => "STB",
            Self::Tgate => "TGATE",
            Self::StiBand0 => "STI_BAND0",
            Self::StiBand1 => "STI_BAND1",
            Self::CarryGen => "CARRY_GEN",
            Self::PulldownN => "PULLDOWN_N",
        }
    }
}

impl fmt::Display for TernaryCellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TernaryCellKind {
    type Err = CellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CellError::UnknownKind(s.to_string()))
    }
}

/// Transfer function of the single-trit cells.
pub fn cell_eval(kind: TernaryCellKind, input: Trit) -> Result<Trit, CellError> {
    use Trit::*;
    let out = match kind {
        TernaryCellKind::Sti => match input {
            Zero => Two,
            One => One,
            Two => Zero,
        },
        TernaryCellKind::Nti => match input {
            Zero => Two,
            One | Two => Zero,
        },
        TernaryCellKind::Pti => match input {
            Zero | One => Two,
            Two => Zero,
        },
        TernaryCellKind::Stb => input,
        other => return Err(CellError::WrongArity(other)),
    };
    Ok(out)
}

/// Transmission gate: passes `input` when enabled, floats otherwise.
pub fn tgate_eval(enabled: bool, input: Trit) -> Option<Trit> {
    enabled.then_some(input)
}

/// Band cells, evaluated on the integer input sum.
pub fn band_eval(kind: TernaryCellKind, sigma: u32) -> Result<Trit, CellError> {
    let out_of_domain = || CellError::OutOfDomain { kind, input: sigma };
    match kind {
        TernaryCellKind::StiBand0 if sigma <= 2 => Ok(Trit::new(sigma).expect("checked")),
        TernaryCellKind::StiBand1 if (3..=5).contains(&sigma) => {
            Ok(Trit::new(sigma - 3).expect("checked"))
        }
        TernaryCellKind::CarryGen if sigma <= 6 => Ok(Trit::new(sigma / 3).expect("checked")),
        TernaryCellKind::PulldownN if sigma == 6 => Ok(Trit::Zero),
        TernaryCellKind::StiBand0
        | TernaryCellKind::StiBand1
        | TernaryCellKind::CarryGen
        | TernaryCellKind::PulldownN => Err(out_of_domain()),
        other => Err(CellError::WrongArity(other)),
    }
}

/// Voltage on the capacitive averaging node.
pub fn sum_node_voltage(a: Trit, b: Trit, cin: Trit, m: &VoltageMap) -> f64 {
    let sigma = f64::from(a.value() + b.value() + cin.value());
    sigma * m.vdd() / 6.0
}

/// Carry detection thresholds in units of `vdd / 6`.
pub const CARRY_LOW_THRESHOLD: f64 = 2.5;
pub const CARRY_HIGH_THRESHOLD: f64 = 5.5;

/// Classifies the sum-node voltage into the output carry.
pub fn carry_gen(v_sum: f64, m: &VoltageMap) -> Trit {
    let unit = m.vdd() / 6.0;
    if v_sum < CARRY_LOW_THRESHOLD * unit {
        Trit::Zero
    } else if v_sum < CARRY_HIGH_THRESHOLD * unit {
        Trit::One
    } else {
        Trit::Two
    }
}

/// Sum-path selector signals derived from the carry band.
///
/// `s` enables the band-0 path, `f` keeps the pull-down off. Only
/// `(1,1)`, `(0,1)` and `(0,0)` are reachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SelectorState {
    pub s: bool,
    pub f: bool,
}

impl SelectorState {
    pub fn band0_enabled(self) -> bool {
        self.s && self.f
    }

    pub fn band1_enabled(self) -> bool {
        !self.s && self.f
    }

    pub fn pulldown_enabled(self) -> bool {
        !self.f
    }

    /// Number of enabled sum paths. Always 1 for reachable states.
    pub fn enabled_paths(self) -> usize {
        [
            self.band0_enabled(),
            self.band1_enabled(),
            self.pulldown_enabled(),
        ]
        .into_iter()
        .filter(|&e| e)
        .count()
    }
}

pub fn selectors(cout: Trit) -> SelectorState {
    match cout {
        Trit::Zero => SelectorState { s: true, f: true },
        Trit::One => SelectorState { s: false, f: true },
        // s is a don't-care here; both gates are off with f low.
        Trit::Two => SelectorState { s: false, f: false },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Design1,
    Design2,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Design1, Variant::Design2];

    pub fn number(self) -> u8 {
        match self {
            Variant::Design1 => 1,
            Variant::Design2 => 2,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "design{}", self.number())
    }
}

/// Architectural summary of one full-adder design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdderDesign {
    pub variant: Variant,
    pub device_count: u32,
    pub input_cap_count: u32,
    pub sum_path_stages: u32,
}

impl AdderDesign {
    pub const fn new(variant: Variant) -> Self {
        match variant {
            Variant::Design1 => Self {
                variant,
                device_count: 55,
                input_cap_count: 3,
                sum_path_stages: 3,
            },
            Variant::Design2 => Self {
                variant,
                device_count: 43,
                input_cap_count: 3,
                sum_path_stages: 2,
            },
        }
    }
}

/// Sum-node voltage back to the integer input sum.
fn sigma_of(v_sum: f64, m: &VoltageMap) -> u32 {
    (v_sum * 6.0 / m.vdd()).round().clamp(0.0, 6.0) as u32
}

/// Evaluates a design at the default 0.9 V supply.
pub fn adder_eval(d: &AdderDesign, a: Trit, b: Trit, cin: Trit) -> (Trit, Trit) {
    adder_eval_at(d, a, b, cin, &VoltageMap::default())
}

pub fn adder_eval_at(d: &AdderDesign, a: Trit, b: Trit, cin: Trit, m: &VoltageMap) -> (Trit, Trit) {
    let v_sum = sum_node_voltage(a, b, cin, m);
    let cout = carry_gen(v_sum, m);
    let sel = selectors(cout);
    debug_assert_eq!(sel.enabled_paths(), 1);
    let sigma = sigma_of(v_sum, m);

    let band = if sel.band0_enabled() {
        band_eval(TernaryCellKind::StiBand0, sigma)
    } else if sel.band1_enabled() {
        band_eval(TernaryCellKind::StiBand1, sigma)
    } else {
        band_eval(TernaryCellKind::PulldownN, sigma)
    };
    let band = band.expect("carry band and sigma agree on lattice voltages");

    let sum = if sel.pulldown_enabled() {
        band
    } else {
        match d.variant {
            Variant::Design1 => {
                let once = cell_eval(TernaryCellKind::Sti, band).expect("single-trit cell");
                cell_eval(TernaryCellKind::Sti, once).expect("single-trit cell")
            }
            Variant::Design2 => cell_eval(TernaryCellKind::Stb, band).expect("single-trit cell"),
        }
    };
    (sum, cout)
}

/// Per-kind transfer tables as CSV, header `kind,input,output`.
pub fn datasheet_csv() -> String {
    let mut out = String::from("kind,input,output\n");
    for kind in TernaryCellKind::ALL {
        match kind {
            TernaryCellKind::Sti
            | TernaryCellKind::Nti
            | TernaryCellKind::Pti
            | TernaryCellKind::Stb => {
                for t in Trit::ALL {
                    let o = cell_eval(kind, t).expect("single-trit cell");
                    out.push_str(&format!("{kind},{t},{o}\n"));
                }
            }
            TernaryCellKind::Tgate => {
                for en in [false, true] {
                    for t in Trit::ALL {
                        let o = tgate_eval(en, t).map_or("z".to_string(), |o| o.to_string());
                        let tag = if en { "on" } else { "off" };
                        out.push_str(&format!("{kind},{tag}:{t},{o}\n"));
                    }
                }
            }
            _ => {
                for sigma in 0..=6 {
                    if let Ok(o) = band_eval(kind, sigma) {
                        out.push_str(&format!("{kind},{sigma},{o}\n"));
                    }
                }
            }
        }
    }
    out
}

/// Checks a design against `full_add` over all 27 inputs; returns mismatches.
pub fn verify_design(d: &AdderDesign, m: &VoltageMap) -> Vec<(Trit, Trit, Trit)> {
    let mut bad = Vec::new();
    for a in Trit::ALL {
        for b in Trit::ALL {
            for c in Trit::ALL {
                if adder_eval_at(d, a, b, c, m) != full_add(a, b, c) {
                    bad.push((a, b, c));
                }
            }
        }
    }
    bad
}
