//! Unbalanced ternary digits, their voltage encoding and base-3 addition.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TernaryError {
    #[error("value {0} is not a trit")]
    NotATrit(u32),
    #[error("sigma {0} is outside 0..=6")]
    OutOfRange(u32),
    #[error("{v} V is not within {tol} V of any logic level")]
    Unresolvable { v: f64, tol: f64 },
    #[error("tolerance {tol} V must be positive and below vdd/4 ({limit} V)")]
    BadTolerance { tol: f64, limit: f64 },
    #[error("operand widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("{value} does not fit in {width} trits")]
    Overflow { value: u128, width: usize },
    #[error("width must be between 1 and {max}", max = MAX_WIDTH)]
    BadWidth,
    #[error("supply voltage must be positive, got {0}")]
    BadVdd(f64),
}

/// Widest vector whose value still fits in a `u128`.
pub const MAX_WIDTH: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Trit {
    Zero = 0,
    One = 1,
    Two = 2,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::Zero, Trit::One, Trit::Two];

    pub const fn value(self) -> u8 {
        self as u8
    }

    pub fn new(v: u32) -> Result<Self, TernaryError> {
        match v {
            0 => Ok(Trit::Zero),
            1 => Ok(Trit::One),
            2 => Ok(Trit::Two),
            _ => Err(TernaryError::NotATrit(v)),
        }
    }
}

impl TryFrom<u8> for Trit {
    type Error = TernaryError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Trit::new(u32::from(v))
    }
}

impl From<Trit> for u8 {
    fn from(t: Trit) -> u8 {
        t.value()
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Maps logic levels onto `{0, vdd/2, vdd}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageMap {
    vdd: f64,
}

impl Default for VoltageMap {
    fn default() -> Self {
        Self { vdd: 0.9 }
    }
}

impl VoltageMap {
    pub fn new(vdd: f64) -> Result<Self, TernaryError> {
        if vdd > 0.0 && vdd.is_finite() {
            Ok(Self { vdd })
        } else {
            Err(TernaryError::BadVdd(vdd))
        }
    }

    pub fn vdd(&self) -> f64 {
        self.vdd
    }

    /// Default conversion tolerance, `vdd / 10`.
    pub fn default_tolerance(&self) -> f64 {
        self.vdd / 10.0
    }

    pub fn level(&self, t: Trit) -> f64 {
        trit_to_voltage(t, self)
    }
}

pub fn trit_to_voltage(t: Trit, m: &VoltageMap) -> f64 {
    match t {
        Trit::Zero => 0.0,
        Trit::One => m.vdd / 2.0,
        Trit::Two => m.vdd,
    }
}

/// Nearest logic level, provided it lies within `tol`.
pub fn voltage_to_trit(v: f64, m: &VoltageMap, tol: f64) -> Result<Trit, TernaryError> {
    let limit = m.vdd / 4.0;
    if !(tol > 0.0 && tol < limit) {
        return Err(TernaryError::BadTolerance { tol, limit });
    }
    Trit::ALL
        .into_iter()
        .find(|&t| (v - trit_to_voltage(t, m)).abs() <= tol)
        .ok_or(TernaryError::Unresolvable { v, tol })
}

/// Single-digit full addition: `a + b + cin = 3 * cout + sum`.
pub fn full_add(a: Trit, b: Trit, cin: Trit) -> (Trit, Trit) {
    let sigma = u32::from(a.value() + b.value() + cin.value());
    decompose(sigma)
        .map(|(q, r)| (r, q))
        .expect("sigma of three trits is at most 6")
}

/// Splits `sigma` into `(quotient, remainder)` with divisor 3.
pub fn decompose(sigma: u32) -> Result<(Trit, Trit), TernaryError> {
    if sigma > 6 {
        return Err(TernaryError::OutOfRange(sigma));
    }
    Ok((Trit::new(sigma / 3)?, Trit::new(sigma % 3)?))
}

/// Fixed-width trit vector, least-significant trit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TritVector {
    trits: Vec<Trit>,
}

impl TritVector {
    pub fn new(trits: Vec<Trit>) -> Result<Self, TernaryError> {
        if trits.is_empty() || trits.len() > MAX_WIDTH {
            return Err(TernaryError::BadWidth);
        }
        Ok(Self { trits })
    }

    pub fn zeros(width: usize) -> Result<Self, TernaryError> {
        Self::new(vec![Trit::Zero; width])
    }

    pub fn from_integer(x: u128, width: usize) -> Result<Self, TernaryError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(TernaryError::BadWidth);
        }
        let mut rest = x;
        let mut trits = Vec::with_capacity(width);
        for _ in 0..width {
            trits.push(Trit::new((rest % 3) as u32)?);
            rest /= 3;
        }
        if rest != 0 {
            return Err(TernaryError::Overflow { value: x, width });
        }
        Ok(Self { trits })
    }

    pub fn width(&self) -> usize {
        self.trits.len()
    }

    pub fn trits(&self) -> &[Trit] {
        &self.trits
    }

    pub fn base3_value(&self) -> u128 {
        self.trits
            .iter()
            .rev()
            .fold(0u128, |acc, t| acc * 3 + u128::from(t.value()))
    }
}

/// Chains full adders from the least-significant position upward.
pub fn ripple_add(
    a: &TritVector,
    b: &TritVector,
    cin: Trit,
) -> Result<(TritVector, Trit), TernaryError> {
    if a.width() != b.width() {
        return Err(TernaryError::WidthMismatch(a.width(), b.width()));
    }
    let mut carry = cin;
    let trits = a
        .trits
        .iter()
        .zip(&b.trits)
        .map(|(&x, &y)| {
            let (s, c) = full_add(x, y, carry);
            carry = c;
            s
        })
        .collect();
    Ok((TritVector { trits }, carry))
}

/// The 27-row truth table as CSV, header `a,b,cin,sum,cout`.
pub fn truth_table_csv() -> String {
    let mut out = String::from("a,b,cin,sum,cout\n");
    for a in Trit::ALL {
        for b in Trit::ALL {
            for c in Trit::ALL {
                let (s, co) = full_add(a, b, c);
                out.push_str(&format!("{a},{b},{c},{s},{co}\n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Trit::*;

    fn tv(v: &[u8]) -> TritVector {
        TritVector::new(v.iter().map(|&x| Trit::try_from(x).unwrap()).collect()).unwrap()
    }

    #[test]
    fn full_add_examples() {
        assert_eq!(full_add(Zero, Zero, Zero), (Zero, Zero));
        assert_eq!(full_add(Two, Two, Two), (Zero, Two));
        assert_eq!(full_add(Two, One, One), (One, One));
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(5), Ok((One, Two)));
        assert_eq!(decompose(0), Ok((Zero, Zero)));
        assert_eq!(decompose(6), Ok((Two, Zero)));
        assert_eq!(decompose(7), Err(TernaryError::OutOfRange(7)));
    }

    #[test]
    fn voltages() {
        let m = VoltageMap::default();
        assert!((trit_to_voltage(One, &m) - 0.45).abs() < 1e-12);
        assert_eq!(trit_to_voltage(Zero, &m), 0.0);
        assert_eq!(trit_to_voltage(Two, &VoltageMap::new(0.8).unwrap()), 0.8);
        assert!(VoltageMap::new(0.0).is_err());
    }

    #[test]
    fn voltage_conversion() {
        let m = VoltageMap::default();
        assert_eq!(voltage_to_trit(0.46, &m, 0.1), Ok(One));
        assert_eq!(voltage_to_trit(0.90, &m, 0.1), Ok(Two));
        assert!(matches!(
            voltage_to_trit(0.60, &m, 0.1),
            Err(TernaryError::Unresolvable { .. })
        ));
        assert!(matches!(
            voltage_to_trit(0.45, &m, 0.3),
            Err(TernaryError::BadTolerance { .. })
        ));
    }

    #[test]
    fn ripple_examples() {
        assert_eq!(
            ripple_add(&tv(&[2, 1]), &tv(&[1, 2]), Zero),
            Ok((tv(&[0, 1]), One))
        );
        assert_eq!(
            ripple_add(&tv(&[0, 0]), &tv(&[0, 0]), Zero),
            Ok((tv(&[0, 0]), Zero))
        );
        assert_eq!(
            ripple_add(&tv(&[2, 2]), &tv(&[2, 2]), Two),
            Ok((tv(&[0, 0]), Two))
        );
        assert_eq!(
            ripple_add(&tv(&[2, 2]), &tv(&[2]), Zero),
            Err(TernaryError::WidthMismatch(2, 1))
        );
    }

    #[test]
    fn base3_examples() {
        assert_eq!(tv(&[2, 1]).base3_value(), 5);
        assert_eq!(tv(&[0, 0, 0]).base3_value(), 0);
        assert_eq!(TritVector::from_integer(26, 3), Ok(tv(&[2, 2, 2])));
        assert_eq!(
            TritVector::from_integer(27, 3),
            Err(TernaryError::Overflow {
                value: 27,
                width: 3
            })
        );
        assert_eq!(TritVector::from_integer(0, 0), Err(TernaryError::BadWidth));
    }

    #[test]
    fn identity_and_commutativity() {
        for a in Trit::ALL {
            for b in Trit::ALL {
                for c in Trit::ALL {
                    let (s, co) = full_add(a, b, c);
                    assert_eq!(a as u8 + b as u8 + c as u8, 3 * co as u8 + s as u8);
                    for p in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        assert_eq!(full_add(p.0, p.1, p.2), (s, co));
                    }
                }
            }
        }
    }

    #[test]
    fn increment_monotone() {
        let weight = |a: Trit, b: Trit, c: Trit| {
            let (s, co) = full_add(a, b, c);
            3 * co as u8 + s as u8
        };
        for a in Trit::ALL {
            for b in Trit::ALL {
                for c in Trit::ALL {
                    let base = weight(a, b, c);
                    if a != Two {
                        assert_eq!(weight(Trit::new(a as u32 + 1).unwrap(), b, c), base + 1);
                    }
                    if c != Two {
                        assert_eq!(weight(a, b, Trit::new(c as u32 + 1).unwrap()), base + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn truth_table_shape() {
        let csv = truth_table_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 28);
        assert_eq!(lines[0], "a,b,cin,sum,cout");
        assert_eq!(lines[27], "2,2,2,0,2");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn level_roundtrip(vdd in 0.01f64..10.0) {
                let m = VoltageMap::new(vdd).unwrap();
                for t in Trit::ALL {
                    let v = trit_to_voltage(t, &m);
                    prop_assert_eq!(voltage_to_trit(v, &m, m.default_tolerance()), Ok(t));
                }
            }

            #[test]
            fn from_integer_inverse(w in 1usize..20, x in any::<u64>()) {
                let x = u128::from(x) % 3u128.pow(w as u32);
                prop_assert_eq!(TritVector::from_integer(x, w).unwrap().base3_value(), x);
            }
        }
    }
}
