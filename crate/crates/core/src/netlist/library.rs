//! Programmatic builders for the bundled cells and the two adder netlists.
//!
//! The adders are representative reconstructions at switch level. Logic
//! gates use two threshold classes: a low class that conducts at half rail
//! and a high class that only conducts at full rail. The sum node is read by
//! single-threshold detectors whose n- and p-type thresholds come from a
//! six-step ladder, one tube per `vdd/6` band, so each detector flips between
//! two adjacent lattice voltages of the capacitive sum node.

use thiserror::Error;

use super::{Device, Fet, Netlist, Subckt, GND, VDD};
use crate::cells::Variant;
use crate::devmodel::{threshold_voltage, Chirality, CnfetInstance, DeviceError, Polarity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("missing {0} threshold class")]
    MissingVthClass(&'static str),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("{class} threshold {vth:.4} V lies outside ({lo:.4}, {hi:.4}) V at vdd = {vdd} V")]
    VthOutOfWindow {
        class: String,
        vth: f64,
        lo: f64,
        hi: f64,
        vdd: f64,
    },
    #[error("no semiconducting tube has a threshold inside ladder band {band} at vdd = {vdd} V")]
    NoLadderChirality { band: usize, vdd: f64 },
    #[error("supply voltage must be positive, got {0}")]
    BadVdd(f64),
    #[error("input capacitance must be positive, got {0}")]
    BadCapacitance(f64),
}

/// Chirality and sizing choices for the structural builders.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub vdd: f64,
    pub low_vth: Option<Chirality>,
    pub high_vth: Option<Chirality>,
    /// Detector thresholds by band; picked automatically when `None`.
    pub ladder: Option<[Chirality; 6]>,
    pub tubes: u32,
    pub input_cap: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            vdd: 0.9,
            low_vth: Chirality::zigzag(19).ok(),
            high_vth: Chirality::zigzag(10).ok(),
            ladder: None,
            tubes: 3,
            input_cap: 1e-15,
        }
    }
}

impl DesignConfig {
    pub fn at_vdd(vdd: f64) -> Self {
        Self {
            vdd,
            ..Self::default()
        }
    }
}

/// A validated [`DesignConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tech {
    pub vdd: f64,
    pub low: Chirality,
    pub high: Chirality,
    pub ladder: [Chirality; 6],
    pub tubes: u32,
    pub input_cap: f64,
}

fn in_window(class: String, c: Chirality, lo: f64, hi: f64, vdd: f64) -> Result<(), ConfigError> {
    let vth = threshold_voltage(c)?;
    if vth > lo && vth < hi {
        Ok(())
    } else {
        Err(ConfigError::VthOutOfWindow {
            class,
            vth,
            lo,
            hi,
            vdd,
        })
    }
}

/// Tube whose threshold sits closest to the middle of `band`.
///
/// Zigzag tubes are preferred; other chiralities are searched only when no
/// zigzag tube fits the band.
pub fn ladder_chirality(band: usize, vdd: f64) -> Result<Chirality, ConfigError> {
    let unit = vdd / 6.0;
    let (lo, hi) = (band as f64 * unit, (band + 1) as f64 * unit);
    let centre = (lo + hi) / 2.0;
    let best = |candidates: &mut dyn Iterator<Item = (u32, u32)>| {
        candidates
            .filter_map(|(n1, n2)| {
                let c = Chirality::new(n1, n2).ok()?;
                let v = threshold_voltage(c).ok()?;
                (v > lo && v < hi).then_some((c, (v - centre).abs()))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    };
    best(&mut (1..=1000u32).map(|n| (n, 0)))
        .or_else(|| best(&mut (1..=100u32).flat_map(|n1| (1..=n1).map(move |n2| (n1, n2)))))
        .ok_or(ConfigError::NoLadderChirality { band, vdd })
}

impl Tech {
    pub fn resolve(cfg: &DesignConfig) -> Result<Self, ConfigError> {
        let vdd = cfg.vdd;
        if !(vdd > 0.0 && vdd.is_finite()) {
            return Err(ConfigError::BadVdd(vdd));
        }
        if !(cfg.input_cap > 0.0 && cfg.input_cap.is_finite()) {
            return Err(ConfigError::BadCapacitance(cfg.input_cap));
        }
        if cfg.tubes == 0 {
            return Err(DeviceError::NoTubes.into());
        }
        let low = cfg.low_vth.ok_or(ConfigError::MissingVthClass("low"))?;
        let high = cfg.high_vth.ok_or(ConfigError::MissingVthClass("high"))?;
        in_window("low".into(), low, 0.0, vdd / 2.0, vdd)?;
        in_window("high".into(), high, vdd / 2.0, vdd, vdd)?;
        let ladder = match cfg.ladder {
            Some(l) => {
                let unit = vdd / 6.0;
                for (band, c) in l.iter().enumerate() {
                    let (lo, hi) = (band as f64 * unit, (band + 1) as f64 * unit);
                    in_window(format!("ladder band {band}"), *c, lo, hi, vdd)?;
                }
                l
            }
            None => {
                let mut l = [low; 6];
                for (band, slot) in l.iter_mut().enumerate() {
                    *slot = ladder_chirality(band, vdd)?;
                }
                l
            }
        };
        Ok(Self {
            vdd,
            low,
            high,
            ladder,
            tubes: cfg.tubes,
            input_cap: cfg.input_cap,
        })
    }

    fn fet(&self, name: &str, pol: Polarity, c: Chirality, d: &str, g: &str, s: &str) -> Device {
        let device =
            CnfetInstance::new(pol, c, self.tubes).expect("chiralities validated by resolve");
        Device::Cnfet(Fet {
            name: name.to_string(),
            device,
            drain: d.to_string(),
            gate: g.to_string(),
            source: s.to_string(),
        })
    }

    fn nfet(&self, name: &str, c: Chirality, d: &str, g: &str, s: &str) -> Device {
        self.fet(name, Polarity::Nfet, c, d, g, s)
    }

    fn pfet(&self, name: &str, c: Chirality, d: &str, g: &str, s: &str) -> Device {
        self.fet(name, Polarity::Pfet, c, d, g, s)
    }

    fn binv(&self, i: &str, o: &str) -> Vec<Device> {
        vec![
            self.pfet("MP", self.low, o, i, VDD),
            self.nfet("MN", self.low, o, i, GND),
        ]
    }

    fn tgate(&self, i: &str, o: &str, en: &str, enb: &str) -> Vec<Device> {
        vec![
            self.nfet("MN", self.low, o, en, i),
            self.pfet("MP", self.low, o, enb, i),
        ]
    }

    fn nti(&self, i: &str, o: &str, tag: &str) -> Vec<Device> {
        vec![
            self.pfet(&format!("MP{tag}"), self.high, o, i, VDD),
            self.nfet(&format!("MN{tag}"), self.low, o, i, GND),
        ]
    }

    fn pti(&self, i: &str, o: &str, tag: &str) -> Vec<Device> {
        vec![
            self.pfet(&format!("MP{tag}"), self.low, o, i, VDD),
            self.nfet(&format!("MN{tag}"), self.high, o, i, GND),
        ]
    }

    /// Detector flipping between `step` and `step + 1` units of `vdd/6`.
    /// Output is high for sum-node voltages at or below `step`.
    fn detector(&self, step: usize, i: &str, o: &str) -> Vec<Device> {
        vec![
            self.pfet("MP", self.ladder[5 - step], o, i, VDD),
            self.nfet("MN", self.ladder[step], o, i, GND),
        ]
    }

    /// Three-level output stage: pull-up, pull-down and a two-device path
    /// from the mid rail through `m`.
    fn output_stage(&self, o: &str, up: &str, down: &str, mid_n: &str, mid_p: &str) -> Vec<Device> {
        vec![
            self.pfet("MPU", self.low, o, up, VDD),
            self.nfet("MND", self.low, o, down, GND),
            self.nfet("MNM", self.low, "m", mid_n, "vmid"),
            self.pfet("MPM", self.low, o, mid_p, "m"),
        ]
    }

    fn sti(&self, i: &str, o: &str) -> Vec<Device> {
        let mut v = self.nti(i, "n", "1");
        v.extend(self.pti(i, "p", "2"));
        v.extend([
            self.pfet("MPU", self.high, o, i, VDD),
            self.nfet("MND", self.high, o, i, GND),
            self.nfet("MNM", self.low, "m", "p", "vmid"),
            self.pfet("MPM", self.low, o, "n", "m"),
        ]);
        v
    }

    fn stb(&self, i: &str, o: &str) -> Vec<Device> {
        let mut v = self.nti(i, "n", "1");
        v.extend(self.pti(i, "p", "2"));
        v.extend(self.output_stage(o, "p", "n", "p", "n"));
        v
    }
}

fn subckt(ports: &[&str], devices: Vec<Device>) -> Subckt {
    let mut s = Subckt::new(ports.iter().copied());
    s.devices = devices;
    s
}

fn inst(name: &str, ports: &[&str], cell: &str) -> Device {
    Device::Instance {
        name: name.to_string(),
        subckt: cell.to_string(),
        ports: ports.iter().map(|p| p.to_string()).collect(),
    }
}

fn mid_source(t: &Tech) -> Device {
    Device::Source {
        name: "VMID".into(),
        node: "vmid".into(),
        volts: t.vdd / 2.0,
    }
}

/// Builds one of the two full-adder netlists.
///
/// Inputs `a`, `b`, `cin`; probed outputs `sum` and `cout`; the capacitive
/// averaging node is `sigma`.
pub fn build_design(variant: Variant, cfg: &DesignConfig) -> Result<Netlist, ConfigError> {
    let t = Tech::resolve(cfg)?;
    let mut n = Netlist::new(variant.to_string());

    for step in 0..6 {
        n.add_subckt(
            format!("det{step}"),
            subckt(&["i", "o"], t.detector(step, "i", "o")),
        );
    }
    n.add_subckt("binv", subckt(&["i", "o"], t.binv("i", "o")));
    n.add_subckt(
        "tgate",
        subckt(&["i", "o", "en", "enb"], t.tgate("i", "o", "en", "enb")),
    );

    let band_cell = match variant {
        Variant::Design1 => "sti_band",
        Variant::Design2 => "stb_band",
    };
    for band in 0..2 {
        let (lo, hi) = (format!("det{}", 3 * band), format!("det{}", 3 * band + 1));
        let mut devs = vec![
            inst("Xlo", &["i", "dlo"], &lo),
            inst("Xhi", &["i", "dhi"], &hi),
        ];
        match variant {
            Variant::Design1 => {
                devs.push(inst("Xel", &["dlo", "elo"], "binv"));
                devs.push(inst("Xeh", &["dhi", "ehi"], "binv"));
                devs.extend(t.output_stage("o", "elo", "ehi", "elo", "ehi"));
            }
            Variant::Design2 => devs.extend(t.output_stage("o", "dhi", "dlo", "dhi", "dlo")),
        }
        n.add_subckt(
            format!("{band_cell}{band}"),
            subckt(&["i", "o", "vmid"], devs),
        );
    }
    if variant == Variant::Design1 {
        n.add_subckt("sti", subckt(&["i", "o", "vmid"], t.sti("i", "o")));
    }

    n.push(mid_source(&t));
    for (name, input) in [("C1", "a"), ("C2", "b"), ("C3", "cin")] {
        n.push(Device::Capacitor {
            name: name.into(),
            a: input.into(),
            b: "sigma".into(),
            farads: t.input_cap,
        });
    }
    n.push(inst("Xds", &["sigma", "sel_s"], "det2"))
        .push(inst("Xdf", &["sigma", "sel_f"], "det5"))
        .push(inst("Xis", &["sel_s", "sel_sb"], "binv"))
        .push(inst("Xif", &["sel_f", "sel_fb"], "binv"))
        .push(t.pfet("MCU", t.low, "cout", "sel_f", VDD))
        .push(t.nfet("MCD", t.low, "cout", "sel_s", GND))
        .push(t.nfet("MCN", t.low, "cm", "sel_f", "vmid"))
        .push(t.pfet("MCP", t.low, "cout", "sel_s", "cm"));

    match variant {
        Variant::Design1 => {
            n.push(inst("Xb0", &["sigma", "nb0", "vmid"], "sti_band0"))
                .push(inst("Xr0", &["nb0", "band0", "vmid"], "sti"))
                .push(inst("Xb1", &["sigma", "nb1", "vmid"], "sti_band1"))
                .push(inst("Xr1", &["nb1", "band1", "vmid"], "sti"));
        }
        Variant::Design2 => {
            n.push(inst("Xb0", &["sigma", "band0", "vmid"], "stb_band0"))
                .push(inst("Xb1", &["sigma", "band1", "vmid"], "stb_band1"));
        }
    }
    n.push(inst("Xt0", &["band0", "sum", "sel_s", "sel_sb"], "tgate"))
        .push(inst("Xt1", &["band1", "bmid", "sel_sb", "sel_s"], "tgate"))
        .push(inst("Xt2", &["bmid", "sum", "sel_f", "sel_fb"], "tgate"))
        .push(t.nfet("MPD", t.low, "sum", "sel_fb", GND))
        .probe("sum")
        .probe("cout");
    for input in ["a", "b", "cin"] {
        n.mark_input(input).expect("inputs are connected");
    }
    debug_assert_eq!(n.validate(), Ok(()));
    Ok(n)
}

/// Stand-alone cells with their own fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BuiltinCell {
    Sti,
    Nti,
    Pti,
    Stb,
    Tgate,
}

impl BuiltinCell {
    pub const ALL: [BuiltinCell; 5] = [Self::Sti, Self::Nti, Self::Pti, Self::Stb, Self::Tgate];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sti => "sti",
            Self::Nti => "nti",
            Self::Pti => "pti",
            Self::Stb => "stb",
            Self::Tgate => "tgate",
        }
    }
}

/// Flat single-cell netlist with input `in` and probed output `out`.
/// The transmission gate also takes `en` and `enb`.
pub fn build_cell(cell: BuiltinCell, cfg: &DesignConfig) -> Result<Netlist, ConfigError> {
    let t = Tech::resolve(cfg)?;
    let mut n = Netlist::new(cell.name());
    let devices = match cell {
        BuiltinCell::Sti => t.sti("in", "out"),
        BuiltinCell::Nti => t.nti("in", "out", ""),
        BuiltinCell::Pti => t.pti("in", "out", ""),
        BuiltinCell::Stb => t.stb("in", "out"),
        BuiltinCell::Tgate => t.tgate("in", "out", "en", "enb"),
    };
    if matches!(cell, BuiltinCell::Sti | BuiltinCell::Stb) {
        n.push(mid_source(&t));
    }
    for d in devices {
        n.push(d);
    }
    n.probe("out");
    n.mark_input("in").expect("connected");
    if cell == BuiltinCell::Tgate {
        n.mark_input("en").expect("connected");
        n.mark_input("enb").expect("connected");
    }
    debug_assert_eq!(n.validate(), Ok(()));
    Ok(n)
}

pub const FIXTURE_NAMES: [&str; 7] = ["design1", "design2", "sti", "nti", "pti", "stb", "tgate"];

/// Built-in netlist by fixture name, at the given configuration.
pub fn builtin(name: &str, cfg: &DesignConfig) -> Option<Result<Netlist, ConfigError>> {
    match name {
        "design1" => Some(build_design(Variant::Design1, cfg)),
        "design2" => Some(build_design(Variant::Design2, cfg)),
        _ => BuiltinCell::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .map(|c| build_cell(c, cfg)),
    }
}

/// Text of a bundled `.tnl` fixture: a comment header plus the canonical
/// serialization of the default-configuration netlist.
pub fn fixture_text(name: &str) -> Option<String> {
    let cfg = DesignConfig::default();
    let netlist = builtin(name, &cfg)?.ok()?;
    let t = Tech::resolve(&cfg).ok()?;
    let ladder: Vec<String> = t.ladder.iter().map(ToString::to_string).collect();
    let mut out = format!(
        "* {name}: representative switch-level reconstruction, vdd = {} V\n\
         * low-Vth {} / high-Vth {}, detector ladder {}\n\
         * regenerate with `trisim netlist {name}`\n",
        cfg.vdd,
        t.low,
        t.high,
        ladder.join(" "),
    );
    out.push_str(&super::serialize(&netlist));
    Some(out)
}
