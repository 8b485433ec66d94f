//! `trisim` command-line front end.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use trisim::bench::{
    device_report, sweep, sweep_csv, truth_table, verify_netlist, Axis, BenchError, OperatingPoint,
    SweepSpec,
};
use trisim::cells::{datasheet_csv, Variant};
use trisim::devmodel::{DeviceParams, WidthMode};
use trisim::netlist::{fixture_text, parse_bytes, Netlist, FIXTURE_NAMES};
use trisim::sim::{waveform_csv, waveform_vcd, Circuit, Level, SimConfig, SimError, Stimulus};
use trisim::ternary::{voltage_to_trit, Trit, VoltageMap};

#[derive(Parser)]
#[command(
    name = "trisim",
    version,
    about = "Switch-level simulator for CNFET ternary full adders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Adder variant(s) to run.
    #[arg(long, global = true, value_enum, default_value_t = DesignArg::Both)]
    design: DesignArg,
    /// Supply voltage in volts.
    #[arg(long, global = true, default_value = "0.9", value_parser = parse_si)]
    vdd: f64,
    /// Output load in farads (suffixes f, p accepted).
    #[arg(long, global = true, default_value = "1f", value_parser = parse_si)]
    load: f64,
    /// Input switching frequency in hertz (suffixes k, M, G accepted).
    #[arg(long, global = true, default_value = "250M", value_parser = parse_si)]
    freq: f64,
    /// Waveform output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Gate-width relation used by `device`.
    #[arg(long = "eq1-mode", global = true, value_enum, default_value_t = WidthArg::AsPublished)]
    eq1_mode: WidthArg,
}

#[derive(Subcommand)]
enum Command {
    /// Print the 27-row truth table and check it against the arithmetic oracle.
    TruthTable,
    /// Simulate a netlist file.
    Simulate {
        file: PathBuf,
        /// Hold an input at a trit, e.g. `a=2`; give every input for a steady-state report.
        #[arg(long = "input", value_parser = parse_assignment)]
        inputs: Vec<(String, Trit)>,
    },
    /// Diameter, threshold and gate width of one chirality.
    Device {
        n1: u32,
        n2: u32,
        #[arg(default_value_t = 1)]
        tubes: u32,
    },
    /// Delay, power and PDP across one axis.
    Sweep {
        #[arg(long, value_enum, default_value_t = AxisArg::Load)]
        axis: AxisArg,
        /// Comma-separated axis values; axis defaults when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_si)]
        values: Vec<f64>,
    },
    /// Check a netlist against its behavioral oracle.
    Verify { file: PathBuf },
    /// Print a bundled netlist.
    Netlist {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIXTURE_NAMES))]
        name: String,
    },
    /// Print per-cell transfer tables.
    Datasheet,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

impl DesignArg {
    fn variants(self) -> Vec<Variant> {
        match self {
            DesignArg::One => vec![Variant::Design1],
            DesignArg::Two => vec![Variant::Design2],
            DesignArg::Both => Variant::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Vcd,
}

#[derive(Clone, Copy, ValueEnum)]
enum WidthArg {
    AsPublished,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Vdd,
    Load,
    #[value(alias = "freq")]
    Frequency,
    Temperature,
}

fn parse_si(s: &str) -> Result<f64, String> {
    let (body, scale) = match s.char_indices().last() {
        Some((i, c)) if c.is_ascii_alphabetic() => {
            let scale = match c {
                'f' | 'F' => 1e-15,
                'p' | 'P' => 1e-12,
                'n' | 'N' => 1e-9,
                'u' | 'U' => 1e-6,
                'm' => 1e-3,
                'k' | 'K' => 1e3,
                'M' => 1e6,
                'G' | 'g' => 1e9,
                _ => return Err(format!("unknown unit suffix `{c}`")),
            };
            (&s[..i], scale)
        }
        _ => (s, 1.0),
    };
    let v: f64 = body.parse().map_err(|_| format!("`{s}` is not a number"))?;
    let v = if scale < 1.0 {
        v / (1.0 / scale)
    } else {
        v * scale
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn parse_assignment(s: &str) -> Result<(String, Trit), String> {
    let (node, value) = s.split_once('=').ok_or("expected node=trit")?;
    let t: u8 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a trit"))?;
    let t = Trit::try_from(t).map_err(|e| e.to_string())?;
    Ok((node.trim().to_string(), t))
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Self {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        BenchError::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read_netlist(path: &Path) -> Result<Netlist, Failure> {
    let bytes = std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_bytes(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn sim_config(cli: &Cli) -> SimConfig {
    SimConfig {
        vdd: cli.vdd,
        c_out_load: cli.load,
        ..SimConfig::default()
    }
}

fn trit_text(level: Level, cfg: &SimConfig) -> String {
    match level {
        Level::X => "x".into(),
        Level::Z => "z".into(),
        Level::Volts(v) => VoltageMap::new(cfg.vdd)
            .and_then(|m| voltage_to_trit(v, &m, cfg.tolerance()))
            .map_or("?".into(), |t| t.to_string()),
    }
}

fn simulate(cli: &Cli, file: &Path, held: &[(String, Trit)]) -> Result<(String, u8), Failure> {
    let n = read_netlist(file)?;
    let cfg = sim_config(cli);
    let c = Circuit::new(&n)?;
    if !held.is_empty() {
        if cli.format == Format::Vcd {
            return Err(usage("--format vcd needs a transient run; drop --input"));
        }
        let inputs: BTreeMap<String, f64> = held
            .iter()
            .map(|(node, t)| (node.clone(), f64::from(t.value()) * cfg.vdd / 2.0))
            .collect();
        let r = c.steady_state(&inputs, &cfg).map_err(|e| match e {
            SimError::MissingInput(_) | SimError::UnknownNode(_) => usage(e.to_string()),
            other => other.into(),
        })?;
        let mut out = String::from("node,level_v,trit,strength\n");
        for p in c.probes() {
            let s = r.get(p).expect("probe is a node");
            out.push_str(&format!(
                "{p},{},{},{}\n",
                s.level,
                trit_text(s.level, &cfg),
                s.strength
            ));
        }
        for node in r.contentions() {
            eprintln!("contention on {node}");
        }
        return Ok((out, 0));
    }
    let period = 1.0 / cli.freq;
    let stimulus: Vec<Stimulus> = c
        .input_assignments(cfg.vdd)
        .into_iter()
        .enumerate()
        .map(|(k, inputs)| Stimulus::new(k as f64 * period, inputs))
        .collect();
    let w = c.transient(&stimulus, &cfg)?;
    let text = match cli.format {
        Format::Csv => waveform_csv(&w),
        Format::Vcd => waveform_vcd(&w, &cfg),
    };
    Ok((text, 0))
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    match &cli.command {
        Command::TruthTable => {
            let t = truth_table(&cli.design.variants(), cli.vdd)?;
            for m in &t.mismatches {
                eprintln!("mismatch: {m}");
            }
            Ok((t.csv, u8::from(!t.mismatches.is_empty())))
        }
        Command::Simulate { file, inputs } => simulate(cli, file, inputs),
        Command::Device { n1, n2, tubes } => {
            let mode = match cli.eq1_mode {
                WidthArg::AsPublished => WidthMode::AsPublished,
                WidthArg::Corrected => WidthMode::Corrected,
            };
            let report = device_report(*n1, *n2, *tubes, &DeviceParams::default(), mode)?;
            let metallic = report.contains("METALLIC");
            Ok((report, if metallic { 2 } else { 0 }))
        }
        Command::Sweep { axis, values } => {
            let axis =
                match axis {
                    AxisArg::Vdd => Axis::Vdd,
                    AxisArg::Load => Axis::Load,
                    AxisArg::Frequency => Axis::Frequency,
                    AxisArg::Temperature => return Err(usage(
                        "temperature is not a model input: delay, power and PDP would be flat; \
                         sweep vdd, load or frequency instead",
                    )),
                };
            let spec = SweepSpec {
                axis,
                values: if values.is_empty() {
                    axis.default_values()
                } else {
                    values.clone()
                },
                variants: cli.design.variants(),
                base: OperatingPoint {
                    vdd: cli.vdd,
                    load: cli.load,
                    freq: cli.freq,
                },
            };
            let rows = sweep(&spec)?;
            Ok((sweep_csv(&rows), 0))
        }
        Command::Verify { file } => {
            let n = read_netlist(file)?;
            let v = verify_netlist(&n, &sim_config(cli))?;
            for m in &v.mismatches {
                eprintln!("mismatch: {m}");
            }
            let ok = v.mismatches.is_empty();
            let summary = format!(
                "{}: {} oracle, {} cases, {} mismatches\n",
                file.display(),
                v.oracle,
                v.cases,
                v.mismatches.len()
            );
            Ok((summary, u8::from(!ok)))
        }
        Command::Netlist { name } => Ok((
            fixture_text(name).ok_or_else(|| usage(format!("no bundled netlist `{name}`")))?,
            0,
        )),
        Command::Datasheet => Ok((datasheet_csv(), 0)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((out, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|()| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("trisim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
