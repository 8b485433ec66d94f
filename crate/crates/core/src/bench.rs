//! Verification and characterization runs behind the `trisim` binary.
//!
//! Every report is plain CSV or `key: value` text and is a pure function of
//! its inputs, so repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::cells::{adder_eval_at, cell_eval, tgate_eval, AdderDesign, TernaryCellKind, Variant};
use crate::devmodel::{
    cnt_diameter, gate_width, threshold_voltage, Chirality, DeviceError, DeviceParams, WidthMode,
};
use crate::netlist::{build_design, ConfigError, DesignConfig, Netlist};
use crate::sim::{measure_nodes, Circuit, Level, SimConfig, SimError, Stimulus};
use crate::ternary::{full_add, voltage_to_trit, TernaryError, Trit, VoltageMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Ternary(#[from] TernaryError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Unsupported(String),
    #[error("{count} mismatches: {}", first.join("; "))]
    Mismatch { count: usize, first: Vec<String> },
}

impl BenchError {
    /// Process exit status: 1 mismatch or failed run, 2 bad request, 3 no fixpoint.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Spec(_)
            | BenchError::Config(_)
            | BenchError::Device(_)
            | BenchError::Ternary(_)
            | BenchError::Unsupported(_) => 2,
            BenchError::Sim(e) if is_nonconvergent(e) => 3,
            BenchError::Sim(
                SimError::BadConfig(_)
                | SimError::MissingInput(_)
                | SimError::UnknownNode(_)
                | SimError::Netlist(_),
            ) => 2,
            BenchError::Sim(_) | BenchError::Mismatch { .. } => 1,
        }
    }
}

fn is_nonconvergent(e: &SimError) -> bool {
    match e {
        SimError::NonConvergent(_) => true,
        SimError::At { source, .. } => is_nonconvergent(source),
        _ => false,
    }
}

fn level_volts(t: Trit, vdd: f64) -> f64 {
    f64::from(t.value()) * vdd / 2.0
}

fn adder_inputs(a: Trit, b: Trit, cin: Trit, vdd: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("a".to_string(), level_volts(a, vdd)),
        ("b".to_string(), level_volts(b, vdd)),
        ("cin".to_string(), level_volts(cin, vdd)),
    ])
}

fn triples() -> impl Iterator<Item = (Trit, Trit, Trit)> {
    Trit::ALL.into_iter().flat_map(|a| {
        Trit::ALL
            .into_iter()
            .flat_map(move |b| Trit::ALL.into_iter().map(move |c| (a, b, c)))
    })
}

fn read_trit(level: Level, sim: &SimConfig) -> Option<Trit> {
    let m = VoltageMap::new(sim.vdd).ok()?;
    voltage_to_trit(level.volts()?, &m, sim.tolerance()).ok()
}

/// Outcome of a truth-table run.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable {
    pub csv: String,
    pub comparisons: usize,
    pub mismatches: Vec<String>,
}

/// Behavioral and structural check of each variant against `full_add`.
///
/// The CSV rows come from the first variant's behavioral model.
pub fn truth_table(variants: &[Variant], vdd: f64) -> Result<TruthTable, BenchError> {
    let m = VoltageMap::new(vdd)?;
    let sim = SimConfig {
        vdd,
        ..SimConfig::default()
    };
    let mut csv = String::from("a,b,cin,sum,cout\n");
    let mut comparisons = 0;
    let mut mismatches = Vec::new();
    for (i, &v) in variants.iter().enumerate() {
        let design = AdderDesign::new(v);
        let circuit = Circuit::new(&build_design(v, &DesignConfig::at_vdd(vdd))?)?;
        for (a, b, c) in triples() {
            let expect = full_add(a, b, c);
            let got = adder_eval_at(&design, a, b, c, &m);
            if i == 0 {
                let _ = writeln!(csv, "{a},{b},{c},{},{}", got.0, got.1);
            }
            comparisons += 1;
            if got != expect {
                mismatches.push(format!("{v} behavioral {a}{b}{c}: got {}{}", got.0, got.1));
            }
            let r = circuit.steady_state(&adder_inputs(a, b, c, vdd), &sim)?;
            let read = |node: &str| r.get(node).and_then(|s| read_trit(s.level, &sim));
            let (sum, cout) = (read("sum"), read("cout"));
            if (sum, cout) != (Some(expect.0), Some(expect.1)) {
                let show = |t: Option<Trit>| t.map_or("?".to_string(), |t| t.to_string());
                mismatches.push(format!(
                    "{v} structural {a}{b}{c}: got {}{}",
                    show(sum),
                    show(cout)
                ));
            }
        }
    }
    Ok(TruthTable {
        csv,
        comparisons,
        mismatches,
    })
}

/// `key: value` report for one chirality.
pub fn device_report(
    n1: u32,
    n2: u32,
    tubes: u32,
    params: &DeviceParams,
    mode: WidthMode,
) -> Result<String, BenchError> {
    params.validate()?;
    if tubes == 0 {
        return Err(DeviceError::NoTubes.into());
    }
    let c = Chirality::new(n1, n2)?;
    let vth = match threshold_voltage(c) {
        Ok(v) => format!("{v:.4}"),
        Err(DeviceError::MetallicTube { .. }) => "METALLIC".to_string(),
        Err(e) => return Err(e.into()),
    };
    let published = gate_width(tubes, params, WidthMode::AsPublished);
    let corrected = gate_width(tubes, params, WidthMode::Corrected);
    let (selected, label) = match mode {
        WidthMode::AsPublished => (published, "as-published"),
        WidthMode::Corrected => (corrected, "corrected"),
    };
    Ok(format!(
        "chirality: {c}\ndiameter_nm: {:.4}\nvth_v: {vth}\ntubes: {tubes}\n\
         width_as_published_nm: {published:.4}\nwidth_corrected_nm: {corrected:.4}\n\
         width_nm: {selected:.4} ({label})\n",
        cnt_diameter(c)
    ))
}

/// Which oracle a netlist is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    Adder,
    Cell(TernaryCellKind),
    Tgate,
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::Adder => f.write_str("full-adder"),
            Oracle::Cell(kind) => write!(f, "{}", kind.name().to_ascii_lowercase()),
            Oracle::Tgate => f.write_str("tgate"),
        }
    }
}

/// Adders are recognised by their ports, cells by their title.
pub fn infer_oracle(n: &Netlist) -> Option<Oracle> {
    let inputs = n.inputs();
    let probes = n.probes();
    if inputs == ["a", "b", "cin"] && probes.contains(&"sum") && probes.contains(&"cout") {
        return Some(Oracle::Adder);
    }
    if !probes.contains(&"out") {
        return None;
    }
    let kind = TernaryCellKind::from_str(&n.name.to_ascii_uppercase()).ok()?;
    match kind {
        TernaryCellKind::Tgate if inputs == ["en", "enb", "in"] => Some(Oracle::Tgate),
        TernaryCellKind::Sti
        | TernaryCellKind::Nti
        | TernaryCellKind::Pti
        | TernaryCellKind::Stb
            if inputs == ["in"] =>
        {
            Some(Oracle::Cell(kind))
        }
        _ => None,
    }
}

/// Outcome of checking a netlist against its oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub oracle: Oracle,
    pub cases: usize,
    pub mismatches: Vec<String>,
}

/// Inputs, expected outputs and a label.
type Case<'a> = (BTreeMap<String, f64>, Vec<(&'a str, Option<Trit>)>, String);

/// Steady-state check of every ternary input case against the inferred oracle.
pub fn verify_netlist(n: &Netlist, sim: &SimConfig) -> Result<Verification, BenchError> {
    let oracle = infer_oracle(n).ok_or_else(|| {
        BenchError::Unsupported(
            "no oracle: expected adder ports a,b,cin -> sum,cout or a cell title (sti, nti, pti, stb, tgate)"
                .into(),
        )
    })?;
    let c = Circuit::new(n)?;
    let vdd = sim.vdd;
    let mut cases: Vec<Case> = Vec::new();
    match oracle {
        Oracle::Adder => {
            for (a, b, cin) in triples() {
                let (s, co) = full_add(a, b, cin);
                cases.push((
                    adder_inputs(a, b, cin, vdd),
                    vec![("sum", Some(s)), ("cout", Some(co))],
                    format!("a={a} b={b} cin={cin}"),
                ));
            }
        }
        Oracle::Cell(kind) => {
            for t in Trit::ALL {
                let out = cell_eval(kind, t).expect("single-trit cell");
                let inputs = BTreeMap::from([("in".to_string(), level_volts(t, vdd))]);
                cases.push((inputs, vec![("out", Some(out))], format!("in={t}")));
            }
        }
        Oracle::Tgate => {
            for en in [false, true] {
                for t in Trit::ALL {
                    let (on, off) = if en { (vdd, 0.0) } else { (0.0, vdd) };
                    let inputs = BTreeMap::from([
                        ("in".to_string(), level_volts(t, vdd)),
                        ("en".to_string(), on),
                        ("enb".to_string(), off),
                    ]);
                    cases.push((
                        inputs,
                        vec![("out", tgate_eval(en, t))],
                        format!("en={} in={t}", en as u8),
                    ));
                }
            }
        }
    }
    let mut mismatches = Vec::new();
    for (inputs, expected, label) in &cases {
        let r = c.steady_state(inputs, sim)?;
        for (node, want) in expected {
            let level = r.get(node).map_or(Level::Z, |s| s.level);
            let ok = match want {
                Some(t) => read_trit(level, sim) == Some(*t),
                None => level == Level::Z,
            };
            if !ok {
                let want = want.map_or("z".to_string(), |t| t.to_string());
                mismatches.push(format!("{label}: {node} = {level}, expected {want}"));
            }
        }
    }
    Ok(Verification {
        oracle,
        cases: cases.len(),
        mismatches,
    })
}

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Vdd,
    Load,
    Frequency,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Vdd => "vdd",
            Axis::Load => "load",
            Axis::Frequency => "frequency",
        })
    }
}

impl Axis {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Axis::Vdd => vec![0.8, 0.9, 1.0],
            Axis::Load => vec![1e-15, 2e-15, 3e-15, 4e-15, 5e-15],
            Axis::Frequency => vec![100e6, 250e6, 500e6],
        }
    }
}

/// Fixed operating point; the swept axis overrides one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub vdd: f64,
    pub load: f64,
    pub freq: f64,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            vdd: 0.9,
            load: 1e-15,
            freq: 250e6,
        }
    }
}

impl OperatingPoint {
    fn with(self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::Vdd => Self { vdd: value, ..self },
            Axis::Load => Self {
                load: value,
                ..self
            },
            Axis::Frequency => Self {
                freq: value,
                ..self
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub variants: Vec<Variant>,
    pub base: OperatingPoint,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.values.is_empty() {
            return Err(BenchError::Spec("no axis values".into()));
        }
        if self.variants.is_empty() {
            return Err(BenchError::Spec("no design selected".into()));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(BenchError::Spec("axis values must be positive".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BenchError::Spec(
                "axis values must be strictly increasing".into(),
            ));
        }
        let base = self.base;
        if [base.vdd, base.load, base.freq]
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(BenchError::Spec("operating point must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variant: Variant,
    pub axis: Axis,
    pub value: f64,
    pub delay: f64,
    pub power: f64,
    pub pdp: f64,
}

/// All 27 input cases, one per clock period, in ascending order.
pub fn exhaustive_stimulus(vdd: f64, period: f64) -> Vec<Stimulus> {
    triples()
        .enumerate()
        .map(|(k, (a, b, c))| Stimulus::new(k as f64 * period, adder_inputs(a, b, c, vdd)))
        .collect()
}

/// Delay, power and PDP of one variant at one operating point.
///
/// The 27 input cases are also checked at switch level; any mismatch fails
/// the point.
pub fn characterize(variant: Variant, op: OperatingPoint) -> Result<(f64, f64, f64), BenchError> {
    let circuit = Circuit::new(&build_design(variant, &DesignConfig::at_vdd(op.vdd))?)?;
    let sim = SimConfig {
        vdd: op.vdd,
        c_out_load: op.load,
        ..SimConfig::default()
    };
    let mut bad = Vec::new();
    for (a, b, c) in triples() {
        let r = circuit.steady_state(&adder_inputs(a, b, c, op.vdd), &sim)?;
        let got = (
            r.get("sum").and_then(|s| read_trit(s.level, &sim)),
            r.get("cout").and_then(|s| read_trit(s.level, &sim)),
        );
        let (s, co) = full_add(a, b, c);
        if got != (Some(s), Some(co)) {
            bad.push(format!("{variant} {a}{b}{c} at vdd={}", op.vdd));
        }
    }
    if !bad.is_empty() {
        return Err(BenchError::Mismatch {
            count: bad.len(),
            first: bad.into_iter().take(3).collect(),
        });
    }
    let period = 1.0 / op.freq;
    let stimulus = exhaustive_stimulus(op.vdd, period);
    let w = circuit.transient(&stimulus, &sim)?;
    let m = measure_nodes(&w, stimulus.len() as f64 * period, Some(&["sum"]))?;
    Ok((m.worst_delay, m.avg_power, m.pdp))
}

/// Rows in spec order: values outer, variants inner. Points run in parallel.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, BenchError> {
    spec.validate()?;
    let points: Vec<(Variant, f64)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.variants.iter().map(move |&d| (d, v)))
        .collect();
    points
        .par_iter()
        .map(|&(variant, value)| {
            let (delay, power, pdp) = characterize(variant, spec.base.with(spec.axis, value))?;
            Ok(SweepRow {
                variant,
                axis: spec.axis,
                value,
                delay,
                power,
                pdp,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("variant,axis,value,delay_s,power_w,pdp_j\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:e},{:.6e},{:.6e},{:.6e}",
            r.variant, r.axis, r.value, r.delay, r.power, r.pdp
        );
    }
    out
}
