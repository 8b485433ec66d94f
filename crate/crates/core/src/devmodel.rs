//! CNFET device parameters derived from nanotube geometry.
//!
//! A MOSFET-like CNFET is characterised here by its chirality vector, which
//! fixes the tube diameter and with it the threshold voltage. Everything in
//! this module is a pure function of its inputs.

use std::fmt;

use thiserror::Error;

/// Diameter per unit chirality norm, in nm.
pub const DIAMETER_COEFF_NM: f64 = 0.0783;

/// Threshold-diameter product, in V·nm.
pub const VTH_DIAMETER_PRODUCT: f64 = 0.43;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("chirality (0,0) does not describe a nanotube")]
    ZeroChirality,
    #[error("chirality ({n1},{n2}) is metallic: n1 - n2 is a multiple of 3")]
    MetallicTube { n1: u32, n2: u32 },
    #[error("a CNFET needs at least one tube")]
    NoTubes,
    #[error("device parameter `{0}` must be strictly positive")]
    NonPositiveParam(&'static str),
}

/// Nanotube chirality `(n1, n2)`, stored with `n1 >= n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chirality {
    n1: u32,
    n2: u32,
}

impl Chirality {
    pub fn new(n1: u32, n2: u32) -> Result<Self, DeviceError> {
        if n1 == 0 && n2 == 0 {
            return Err(DeviceError::ZeroChirality);
        }
        let (n1, n2) = if n1 >= n2 { (n1, n2) } else { (n2, n1) };
        Ok(Self { n1, n2 })
    }

    /// Zigzag tube `(n, 0)`.
    pub fn zigzag(n: u32) -> Result<Self, DeviceError> {
        Self::new(n, 0)
    }

    pub fn n1(self) -> u32 {
        self.n1
    }

    pub fn n2(self) -> u32 {
        self.n2
    }
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n1, self.n2)
    }
}

/// Tube diameter in nm.
pub fn cnt_diameter(c: Chirality) -> f64 {
    let (n1, n2) = (f64::from(c.n1), f64::from(c.n2));
    DIAMETER_COEFF_NM * (n1 * n1 + n2 * n2 + n1 * n2).sqrt()
}

/// A tube is metallic when `n1 - n2` is a multiple of three.
pub fn is_semiconducting(c: Chirality) -> bool {
    !(c.n1 - c.n2).is_multiple_of(3)
}

/// Threshold voltage in volts. Undefined for metallic tubes.
pub fn threshold_voltage(c: Chirality) -> Result<f64, DeviceError> {
    if !is_semiconducting(c) {
        return Err(DeviceError::MetallicTube { n1: c.n1, n2: c.n2 });
    }
    Ok(VTH_DIAMETER_PRODUCT / cnt_diameter(c))
}

/// Process constants of the 32 nm CNFET compact model.
///
/// `pitch` and `w_min` are not part of the model card; their defaults are
/// local configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Physical channel length (nm).
    pub l_ch: f64,
    /// Mean free path in the intrinsic channel (nm).
    pub l_geff: f64,
    /// Doped drain-side extension length (nm).
    pub l_dd: f64,
    /// Doped source-side extension length (nm).
    pub l_ss: f64,
    /// High-k gate dielectric thickness (nm).
    pub t_ox: f64,
    /// Gate dielectric constant.
    pub k_gate: f64,
    /// Fermi level of the doped S/D tube (eV), kept as tabulated.
    pub e_fi: f64,
    /// Channel-to-substrate coupling capacitance (pF/m).
    pub c_sub: f64,
    /// Inter-tube spacing (nm).
    pub pitch: f64,
    /// Minimum gate width (nm).
    pub w_min: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            l_ch: 32.0,
            l_geff: 100.0,
            l_dd: 32.0,
            l_ss: 32.0,
            t_ox: 1.0,
            k_gate: 16.0,
            e_fi: 6.0,
            c_sub: 20.0,
            pitch: 20.0,
            w_min: 32.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let fields = [
            ("l_ch", self.l_ch),
            ("l_geff", self.l_geff),
            ("l_dd", self.l_dd),
            ("l_ss", self.l_ss),
            ("t_ox", self.t_ox),
            ("c_sub", self.c_sub),
            ("pitch", self.pitch),
            ("w_min", self.w_min),
        ];
        match fields
            .iter()
            .find(|(_, v)| v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
        {
            Some((name, _)) => Err(DeviceError::NonPositiveParam(name)),
            None => Ok(()),
        }
    }
}

/// How the gate-width relation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthMode {
    /// `min(w_min, N * pitch)`, exactly as tabulated in the model reference.
    #[default]
    AsPublished,
    /// `max(w_min, N * pitch)`, which never drops below the minimum width.
    Corrected,
}

/// Gate width in nm for a device with `tubes` nanotubes under the gate.
pub fn gate_width(tubes: u32, p: &DeviceParams, mode: WidthMode) -> f64 {
    let spread = f64::from(tubes) * p.pitch;
    match mode {
        WidthMode::AsPublished => p.w_min.min(spread),
        WidthMode::Corrected => p.w_min.max(spread),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Nfet,
    Pfet,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::Nfet => "nfet",
            Polarity::Pfet => "pfet",
        }
    }
}

/// A validated CNFET: semiconducting chirality and at least one tube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnfetInstance {
    polarity: Polarity,
    chirality: Chirality,
    tubes: u32,
    vth: f64,
}

impl CnfetInstance {
    pub fn new(polarity: Polarity, chirality: Chirality, tubes: u32) -> Result<Self, DeviceError> {
        if tubes == 0 {
            return Err(DeviceError::NoTubes);
        }
        let vth = threshold_voltage(chirality)?;
        Ok(Self {
            polarity,
            chirality,
            tubes,
            vth,
        })
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn chirality(&self) -> Chirality {
        self.chirality
    }

    pub fn tubes(&self) -> u32 {
        self.tubes
    }

    pub fn vth(&self) -> f64 {
        self.vth
    }

    /// Switch abstraction: the channel conducts when the gate overdrive
    /// relative to the source exceeds the threshold. P-type devices use the
    /// same magnitude rule with the sign flipped.
    pub fn conducts(&self, v_gate: f64, v_src: f64) -> bool {
        match self.polarity {
            Polarity::Nfet => v_gate - v_src > self.vth,
            Polarity::Pfet => v_src - v_gate > self.vth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chir(n1: u32, n2: u32) -> Chirality {
        Chirality::new(n1, n2).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn diameters() {
        assert!(rel(cnt_diameter(chir(19, 0)), 1.4877) < 1e-4);
        assert!(rel(cnt_diameter(chir(10, 0)), 0.7830) < 1e-4);
        assert!(rel(cnt_diameter(chir(7, 5)), 0.8175) < 1e-4);
        assert_eq!(Chirality::new(0, 0), Err(DeviceError::ZeroChirality));
    }

    #[test]
    fn swap_normalises() {
        assert_eq!(chir(5, 7), chir(7, 5));
        assert_eq!(chir(5, 7).n1(), 7);
    }

    #[test]
    fn metallic_rule() {
        assert!(!is_semiconducting(chir(6, 3)));
        assert!(!is_semiconducting(chir(5, 5)));
        assert!(is_semiconducting(chir(19, 0)));
        assert_eq!(
            threshold_voltage(chir(6, 3)),
            Err(DeviceError::MetallicTube { n1: 6, n2: 3 })
        );
    }

    #[test]
    fn thresholds() {
        assert!(rel(threshold_voltage(chir(19, 0)).unwrap(), 0.2890) < 1e-3);
        assert!(rel(threshold_voltage(chir(10, 0)).unwrap(), 0.5492) < 1e-3);
        assert!(rel(threshold_voltage(chir(13, 0)).unwrap(), 0.4224) < 1e-3);
    }

    #[test]
    fn width_modes() {
        let p = DeviceParams::default();
        assert_eq!(gate_width(3, &p, WidthMode::AsPublished), 32.0);
        assert_eq!(gate_width(3, &p, WidthMode::Corrected), 60.0);
        assert_eq!(gate_width(1, &p, WidthMode::AsPublished), 20.0);
    }

    #[test]
    fn params_validate() {
        assert!(DeviceParams::default().validate().is_ok());
        let p = DeviceParams {
            pitch: 0.0,
            ..Default::default()
        };
        assert_eq!(p.validate(), Err(DeviceError::NonPositiveParam("pitch")));
    }

    #[test]
    fn conduction() {
        let n19 = CnfetInstance::new(Polarity::Nfet, chir(19, 0), 3).unwrap();
        let n10 = CnfetInstance::new(Polarity::Nfet, chir(10, 0), 3).unwrap();
        let p19 = CnfetInstance::new(Polarity::Pfet, chir(19, 0), 3).unwrap();
        assert!(n19.conducts(0.45, 0.0));
        assert!(!n10.conducts(0.45, 0.0));
        assert!(!p19.conducts(0.9, 0.9));
        assert!(p19.conducts(0.0, 0.9));
    }

    #[test]
    fn metallic_device_rejected() {
        assert_eq!(
            CnfetInstance::new(Polarity::Nfet, chir(6, 3), 1),
            Err(DeviceError::MetallicTube { n1: 6, n2: 3 })
        );
        assert_eq!(
            CnfetInstance::new(Polarity::Nfet, chir(19, 0), 0),
            Err(DeviceError::NoTubes)
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn semiconducting() -> impl Strategy<Value = Chirality> {
            (1u32..60, 0u32..60)
                .prop_map(|(a, b)| Chirality::new(a, b).unwrap())
                .prop_filter("semiconducting", |c| is_semiconducting(*c))
        }

        proptest! {
            #[test]
            fn vth_times_diameter(c in semiconducting()) {
                let v = threshold_voltage(c).unwrap();
                prop_assert!(((v * cnt_diameter(c)) - 0.43).abs() / 0.43 < 1e-9);
            }

            #[test]
            fn diameter_increasing_in_n1(n1 in 1u32..200, n2 in 0u32..200) {
                let a = cnt_diameter(Chirality { n1: n1.max(n2), n2: n2.min(n1) });
                let b = cnt_diameter(Chirality { n1: n1.max(n2) + 1, n2: n2.min(n1) });
                prop_assert!(b > a);
            }

            #[test]
            fn diameter_symmetric(n1 in 0u32..500, n2 in 1u32..500) {
                let a = cnt_diameter(Chirality::new(n1, n2).unwrap());
                let b = cnt_diameter(Chirality::new(n2, n1).unwrap());
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }

            #[test]
            fn metallic_always_errors(n2 in 0u32..100, k in 0u32..30) {
                prop_assume!(n2 + 3 * k > 0);
                let c = Chirality::new(n2 + 3 * k, n2).unwrap();
                prop_assert!(threshold_voltage(c).is_err());
            }

            #[test]
            fn nfet_monotone_in_gate(c in semiconducting(), g in 0.0f64..1.0, dg in 0.0f64..1.0, s in 0.0f64..1.0) {
                let t = CnfetInstance::new(Polarity::Nfet, c, 1).unwrap();
                if t.conducts(g, s) {
                    prop_assert!(t.conducts(g + dg, s));
                }
            }
        }
    }
}
