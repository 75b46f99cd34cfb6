//! Exact rational phases on the unit circle and their complex embedding.
//!
//! A phase `r/q` stands for `e(r/q) = exp(2πi r/q)`. Rational phases are
//! always kept reduced into `[0, 1)`, so equality is structural.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// A reduced fraction in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRatio", into = "RawRatio")]
pub struct Ratio01 {
    num: u64,
    den: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRatio {
    num: i64,
    den: u64,
}

impl TryFrom<RawRatio> for Ratio01 {
    type Error = Error;
    fn try_from(raw: RawRatio) -> Result<Self> {
        Ratio01::new(raw.num, raw.den)
    }
}

impl From<Ratio01> for RawRatio {
    fn from(r: Ratio01) -> Self {
        RawRatio { num: r.num as i64, den: r.den }
    }
}

impl Ratio01 {
    pub const ZERO: Ratio01 = Ratio01 { num: 0, den: 1 };

    /// Reduces `num/den` modulo 1.
    pub fn new(num: i64, den: u64) -> Result<Self> {
        ensure!(den >= 1, Validation, "phase denominator must be positive");
        let r = num.rem_euclid(den as i64) as u64;
        Ok(Self::reduced(r, den))
    }

    fn reduced(num: u64, den: u64) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let g = num.gcd(&den);
        Ratio01 { num: num / g, den: den / g }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn add(self, other: Ratio01) -> Ratio01 {
        let den = self.den.lcm(&other.den);
        let a = self.num as u128 * (den / self.den) as u128;
        let b = other.num as u128 * (den / other.den) as u128;
        Self::reduced(((a + b) % den as u128) as u64, den)
    }

    pub fn neg(self) -> Ratio01 {
        Self::reduced((self.den - self.num) % self.den, self.den)
    }

    pub fn scale(self, k: i64) -> Ratio01 {
        let m = (k as i128).rem_euclid(self.den as i128) as u128;
        Self::reduced(((self.num as u128 * m) % self.den as u128) as u64, self.den)
    }

    /// Numerator when written over the denominator `l` (which must be a multiple of `den`).
    pub fn over(self, l: u64) -> u64 {
        debug_assert_eq!(l % self.den, 0);
        self.num * (l / self.den)
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_complex(self) -> Complex64 {
        turn_to_complex(self.num, self.den)
    }
}

impl Ord for Ratio01 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Ratio01 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ratio01 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `e(k/l)` with the angle folded into `[-1/2, 1/2)` turns before scaling by 2π.
pub fn turn_to_complex(k: u64, l: u64) -> Complex64 {
    let k = k % l;
    // exact quarter turns keep the identity tests free of sin/cos noise
    if (4 * k) % l == 0 {
        return match 4 * k / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let t = if 2 * k >= l { k as f64 / l as f64 - 1.0 } else { k as f64 / l as f64 };
    Complex64::from_polar(1.0, TAU * t)
}

/// `e(x)` for a real number of turns.
pub fn e(x: f64) -> Complex64 {
    let t = x - x.round();
    Complex64::from_polar(1.0, TAU * t)
}

/// A value `f(p)` on the unit circle.
///
/// Irrational carriers are compared bit-for-bit and never equal a rational phase.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawPhase", into = "RawPhase")]
pub enum UnitPhase {
    Rational(Ratio01),
    Irrational(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawPhase {
    Rational { num: i64, den: u64 },
    Irrational { alpha: f64 },
}

impl TryFrom<RawPhase> for UnitPhase {
    type Error = Error;
    fn try_from(raw: RawPhase) -> Result<Self> {
        match raw {
            RawPhase::Rational { num, den } => Ok(UnitPhase::Rational(Ratio01::new(num, den)?)),
            RawPhase::Irrational { alpha } => UnitPhase::irrational(alpha),
        }
    }
}

impl From<UnitPhase> for RawPhase {
    fn from(p: UnitPhase) -> Self {
        match p {
            UnitPhase::Rational(r) => RawPhase::Rational { num: r.num as i64, den: r.den },
            UnitPhase::Irrational(alpha) => RawPhase::Irrational { alpha },
        }
    }
}

impl PartialEq for UnitPhase {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (UnitPhase::Rational(a), UnitPhase::Rational(b)) => a == b,
            (UnitPhase::Irrational(a), UnitPhase::Irrational(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for UnitPhase {}

impl UnitPhase {
    pub const ONE: UnitPhase = UnitPhase::Rational(Ratio01::ZERO);

    pub fn rational(num: i64, den: u64) -> Result<Self> {
        Ok(UnitPhase::Rational(Ratio01::new(num, den)?))
    }

    /// Irrational carrier `alpha`, which must lie strictly inside `(0, 1)`.
    pub fn irrational(alpha: f64) -> Result<Self> {
        ensure!(
            alpha.is_finite() && alpha > 0.0 && alpha < 1.0,
            Validation,
            "irrational phase must lie in (0,1), got {alpha}"
        );
        Ok(UnitPhase::Irrational(alpha))
    }

    fn from_turns(x: f64) -> UnitPhase {
        let t = x - x.floor();
        if t == 0.0 || t >= 1.0 {
            UnitPhase::ONE
        } else {
            UnitPhase::Irrational(t)
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, UnitPhase::Rational(_))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, UnitPhase::Rational(r) if r.is_zero())
    }

    pub fn turns(&self) -> f64 {
        match self {
            UnitPhase::Rational(r) => r.as_f64(),
            UnitPhase::Irrational(a) => *a,
        }
    }

    /// `self^k`.
    pub fn pow(&self, k: i64) -> UnitPhase {
        match self {
            UnitPhase::Rational(r) => UnitPhase::Rational(r.scale(k)),
            UnitPhase::Irrational(a) => {
                if k == 0 {
                    UnitPhase::ONE
                } else {
                    UnitPhase::from_turns(a * k as f64)
                }
            }
        }
    }

    pub fn conj(&self) -> UnitPhase {
        self.pow(-1)
    }

    /// `self · other`; exact when both are rational.
    pub fn mul(&self, other: &UnitPhase) -> UnitPhase {
        match (self, other) {
            (UnitPhase::Rational(a), UnitPhase::Rational(b)) => UnitPhase::Rational(a.add(*b)),
            _ => UnitPhase::from_turns(self.turns() + other.turns()),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            UnitPhase::Rational(r) => r.to_complex(),
            UnitPhase::Irrational(a) => e(*a),
        }
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitPhase::Rational(r) => write!(f, "e({r})"),
            UnitPhase::Irrational(a) => write!(f, "e({a}~)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_reduces_mod_one() {
        let r = Ratio01::new(7, 4).unwrap();
        assert_eq!((r.num(), r.den()), (3, 4));
        let r = Ratio01::new(-1, 3).unwrap();
        assert_eq!((r.num(), r.den()), (2, 3));
        assert_eq!(Ratio01::new(4, 4).unwrap(), Ratio01::ZERO);
        assert!(Ratio01::new(1, 0).is_err());
    }

    #[test]
    fn ratio_arithmetic() {
        let a = Ratio01::new(1, 2).unwrap();
        let b = Ratio01::new(1, 3).unwrap();
        assert_eq!(a.add(b), Ratio01::new(5, 6).unwrap());
        assert_eq!(a.add(a), Ratio01::ZERO);
        assert_eq!(b.neg(), Ratio01::new(2, 3).unwrap());
        assert_eq!(b.scale(-4), Ratio01::new(2, 3).unwrap());
        assert!(b < a);
    }

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(turn_to_complex(1, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(turn_to_complex(3, 4), Complex64::new(0.0, -1.0));
        let z = turn_to_complex(1, 3);
        assert!((z - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn irrational_never_equals_rational() {
        let a = UnitPhase::irrational(0.5).unwrap();
        assert_ne!(a, UnitPhase::rational(1, 2).unwrap());
        assert_eq!(a, UnitPhase::Irrational(0.5));
        assert!(UnitPhase::irrational(1.5).is_err());
        assert!(UnitPhase::Irrational(0.25).pow(4).is_one());
    }

    #[test]
    fn phase_json_shape() {
        let p: UnitPhase = serde_json::from_str(r#"{"type":"rational","num":1,"den":2}"#).unwrap();
        assert_eq!(p, UnitPhase::rational(1, 2).unwrap());
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"type":"rational","num":1,"den":2}"#);
        assert!(serde_json::from_str::<UnitPhase>(r#"{"type":"rational","num":1,"den":2,"x":0}"#)
            .is_err());
    }
}
