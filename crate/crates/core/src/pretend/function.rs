use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::partition::Partition;
use crate::arith::{PrimeSet, Sieve};
use crate::error::{Error, Result};
use crate::phase::{e, turn_to_complex, Ratio01, UnitPhase};

/// Finitely generated completely multiplicative function `ℕ → 𝕊¹`,
/// given by one phase per prime class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMult", into = "RawMult")]
pub struct FgMultFunction {
    partition: Partition,
    phases: Vec<UnitPhase>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMult {
    classes: Vec<RawMultClass>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMultClass {
    spec: PrimeSet,
    phase: UnitPhase,
}

impl TryFrom<RawMult> for FgMultFunction {
    type Error = Error;
    fn try_from(raw: RawMult) -> Result<Self> {
        FgMultFunction::new(raw.classes.into_iter().map(|c| (c.spec, c.phase)).collect())
    }
}

impl From<FgMultFunction> for RawMult {
    fn from(f: FgMultFunction) -> Self {
        RawMult {
            classes: f
                .classes()
                .map(|(spec, phase)| RawMultClass { spec: spec.clone(), phase })
                .collect(),
        }
    }
}

impl FgMultFunction {
    pub fn new(classes: Vec<(PrimeSet, UnitPhase)>) -> Result<Self> {
        let (specs, phases) = classes.into_iter().unzip();
        Ok(FgMultFunction { partition: Partition::new(specs)?, phases })
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self::new(vec![(PrimeSet::Default, UnitPhase::ONE)]).unwrap()
    }

    /// Liouville's λ: every prime maps to −1.
    pub fn liouville() -> Self {
        Self::new(vec![(PrimeSet::Default, UnitPhase::rational(1, 2).unwrap())]).unwrap()
    }

    /// `phase` on the primes of `set`, 1 elsewhere.
    pub fn on_set(set: PrimeSet, phase: UnitPhase) -> Result<Self> {
        Self::new(vec![(set, phase), (PrimeSet::Default, UnitPhase::ONE)])
    }

    /// `λ_P(n) = (−1)^{Ω_P(n)}`.
    pub fn liouville_restricted(set: PrimeSet) -> Result<Self> {
        Self::on_set(set, UnitPhase::rational(1, 2)?)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&PrimeSet, UnitPhase)> + '_ {
        self.partition.specs().iter().zip(self.phases.iter().copied())
    }

    pub fn num_classes(&self) -> usize {
        self.phases.len()
    }

    pub(crate) fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Lcm of the residue-class moduli (1 if there are none).
    pub fn class_modulus(&self) -> u64 {
        self.partition.modulus()
    }

    pub(crate) fn phase_of_class(&self, i: usize) -> UnitPhase {
        self.phases[i]
    }

    /// `f(p)` for a prime `p`.
    pub fn at_prime(&self, p: u64) -> UnitPhase {
        self.phases[self.partition.class_of_prime(p)]
    }

    /// The phase carried by almost every prime `≡ r` modulo a multiple of the class modulus.
    pub(crate) fn at_residue(&self, r: u64) -> UnitPhase {
        self.phases[self.partition.class_of_residue(r)]
    }

    /// Same partition, phases mapped by `op`.
    pub fn map_phases(&self, op: impl Fn(UnitPhase) -> UnitPhase) -> Self {
        FgMultFunction {
            partition: self.partition.clone(),
            phases: self.phases.iter().map(|&p| op(p)).collect(),
        }
    }

    /// `f^k` (negative `k` conjugates).
    pub fn pow(&self, k: i64) -> Self {
        self.map_phases(|p| p.pow(k))
    }

    pub fn conj(&self) -> Self {
        self.pow(-1)
    }

    /// Pointwise product, written over the common refinement of both partitions.
    pub fn mul(&self, other: &FgMultFunction) -> Result<Self> {
        let m = self.class_modulus().lcm(&other.class_modulus());
        let mut cells: Vec<(UnitPhase, Vec<u64>)> = Vec::new();
        for r in super::reduced_residues(m) {
            let v = self.at_residue(r).mul(&other.at_residue(r));
            match cells.iter_mut().find(|(w, _)| *w == v) {
                Some((_, rs)) => rs.push(r),
                None => cells.push((v, vec![r])),
            }
        }
        let mut special: Vec<u64> = crate::arith::factor_small(m).into_iter().map(|(p, _)| p).collect();
        special.extend(self.partition.explicit_primes());
        special.extend(other.partition.explicit_primes());
        special.sort_unstable();
        special.dedup();
        let mut classes: Vec<(PrimeSet, UnitPhase)> = Vec::new();
        for p in special {
            let v = self.at_prime(p).mul(&other.at_prime(p));
            match classes.iter_mut().find(|(_, w)| *w == v) {
                Some((PrimeSet::Explicit(ps), _)) => ps.push(p),
                _ => classes.push((PrimeSet::Explicit(vec![p]), v)),
            }
        }
        if m == 1 {
            classes.push((PrimeSet::Default, cells[0].0));
        } else {
            for (v, rs) in cells {
                classes.push((PrimeSet::residue(m, rs)?, v));
            }
        }
        Self::new(classes)
    }

    pub fn is_rational(&self) -> bool {
        self.phases.iter().all(UnitPhase::is_rational)
    }

    /// Lcm of the rational phase denominators (1 if none).
    pub fn rational_order(&self) -> u64 {
        self.phases.iter().fold(1, |acc, p| match p {
            UnitPhase::Rational(r) => acc.lcm(&r.den()),
            UnitPhase::Irrational(_) => acc,
        })
    }

    /// `f(n)` with phases summed exactly.
    pub fn phase_at(&self, sieve: &Sieve, n: u64) -> Turn {
        PhaseKernel::new(self, self.rational_order()).turn(sieve, n)
    }

    pub fn eval(&self, sieve: &Sieve, n: u64) -> Complex64 {
        self.phase_at(sieve, n).to_complex()
    }
}

/// Finitely generated completely additive function `ℕ → ℤ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAdd", into = "RawAdd")]
pub struct FgAddFunction {
    partition: Partition,
    values: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdd {
    classes: Vec<RawAddClass>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddClass {
    spec: PrimeSet,
    value: i64,
}

impl TryFrom<RawAdd> for FgAddFunction {
    type Error = Error;
    fn try_from(raw: RawAdd) -> Result<Self> {
        FgAddFunction::new(raw.classes.into_iter().map(|c| (c.spec, c.value)).collect())
    }
}

impl From<FgAddFunction> for RawAdd {
    fn from(a: FgAddFunction) -> Self {
        RawAdd {
            classes: a
                .classes()
                .map(|(spec, value)| RawAddClass { spec: spec.clone(), value })
                .collect(),
        }
    }
}

impl FgAddFunction {
    pub fn new(classes: Vec<(PrimeSet, i64)>) -> Result<Self> {
        let (specs, values) = classes.into_iter().unzip();
        Ok(FgAddFunction { partition: Partition::new(specs)?, values })
    }

    /// Ω: every prime counts 1.
    pub fn big_omega() -> Self {
        Self::new(vec![(PrimeSet::Default, 1)]).unwrap()
    }

    /// Ω_P: primes of `set` count 1, others 0.
    pub fn big_omega_restricted(set: PrimeSet) -> Result<Self> {
        Self::new(vec![(set, 1), (PrimeSet::Default, 0)])
    }

    pub fn zero() -> Self {
        Self::new(vec![(PrimeSet::Default, 0)]).unwrap()
    }

    pub fn classes(&self) -> impl Iterator<Item = (&PrimeSet, i64)> + '_ {
        self.partition.specs().iter().zip(self.values.iter().copied())
    }

    pub fn at_prime(&self, p: u64) -> i64 {
        self.values[self.partition.class_of_prime(p)]
    }

    pub fn eval(&self, sieve: &Sieve, n: u64) -> i64 {
        sieve
            .factors(n)
            .map(|(p, e)| e as i64 * self.at_prime(p))
            .sum()
    }

    /// The multiplicative function `n ↦ e(a(n)·θ)`.
    pub fn exp_twist(&self, theta: UnitPhase) -> FgMultFunction {
        FgMultFunction {
            partition: self.partition.clone(),
            phases: self.values.iter().map(|&v| theta.pow(v)).collect(),
        }
    }
}

/// A phase `idx/den + irr` in turns; the rational part is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Turn {
    pub idx: u64,
    pub den: u64,
    pub irr: f64,
}

impl Turn {
    pub fn rational(&self) -> Option<Ratio01> {
        (self.irr == 0.0).then(|| Ratio01::new(self.idx as i64, self.den).unwrap())
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.irr == 0.0 {
            turn_to_complex(self.idx, self.den)
        } else {
            e(self.idx as f64 / self.den as f64 + self.irr)
        }
    }
}

/// Class-indexed phase data of a function, written over a fixed common denominator.
#[derive(Debug, Clone)]
pub(crate) struct PhaseKernel<'a> {
    partition: &'a Partition,
    den: u64,
    rational: Vec<u64>,
    irrational: Vec<f64>,
}

impl<'a> PhaseKernel<'a> {
    /// `den` must be a multiple of `f.rational_order()`.
    pub(crate) fn new(f: &'a FgMultFunction, den: u64) -> Self {
        let (rational, irrational) = f
            .phases
            .iter()
            .map(|p| match p {
                UnitPhase::Rational(r) => (r.over(den), 0.0),
                UnitPhase::Irrational(a) => (0, *a),
            })
            .unzip();
        PhaseKernel { partition: &f.partition, den, rational, irrational }
    }

    pub(crate) fn den(&self) -> u64 {
        self.den
    }

    #[inline]
    pub(crate) fn turn(&self, sieve: &Sieve, n: u64) -> Turn {
        let mut idx = 0u64;
        let mut irr = 0.0;
        for (p, e) in sieve.factors(n) {
            let c = self.partition.class_of_prime(p);
            idx += e as u64 * self.rational[c];
            irr += e as f64 * self.irrational[c];
        }
        Turn { idx: idx % self.den, den: self.den, irr: irr - irr.floor() }
    }
}

/// Table of `e(k/den)` for the exact part of phase sums.
#[derive(Debug, Clone)]
pub(crate) struct RootTable {
    den: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub(crate) fn new(den: u64) -> Self {
        let roots = if den <= 1 << 16 { (0..den).map(|k| turn_to_complex(k, den)).collect() } else { Vec::new() };
        RootTable { den, roots }
    }

    #[inline]
    pub(crate) fn get(&self, idx: u64, irr: f64) -> Complex64 {
        let base = if self.roots.is_empty() {
            turn_to_complex(idx % self.den, self.den)
        } else {
            self.roots[(idx % self.den) as usize]
        };
        if irr == 0.0 {
            base
        } else {
            base * e(irr)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let s = Sieve::new(1000).unwrap();
        let lam = FgMultFunction::liouville();
        assert_eq!(lam.eval(&s, 12), Complex64::new(-1.0, 0.0));
        assert_eq!(FgMultFunction::one().eval(&s, 997), Complex64::new(1.0, 0.0));
        let f = FgMultFunction::liouville_restricted(PrimeSet::explicit(vec![2]).unwrap()).unwrap();
        assert_eq!(f.eval(&s, 40), Complex64::new(-1.0, 0.0));
        assert_eq!(f.eval(&s, 1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn eval_add_examples() {
        let s = Sieve::new(100).unwrap();
        assert_eq!(FgAddFunction::big_omega().eval(&s, 12), 3);
        let a = FgAddFunction::new(vec![(PrimeSet::explicit(vec![2]).unwrap(), 0), (PrimeSet::Default, 1)])
            .unwrap();
        assert_eq!(a.eval(&s, 12), 1);
        assert_eq!(a.eval(&s, 1), 0);
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let txt = r#"{"classes":[{"spec":{"type":"explicit","primes":[2]},"phase":{"type":"rational","num":1,"den":2}},{"spec":{"type":"default"},"phase":{"type":"rational","num":0,"den":1}}]}"#;
        let f: FgMultFunction = serde_json::from_str(txt).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), txt);
        let bad = txt.replace("\"primes\":[2]", "\"primes\":[2],\"extra\":1");
        assert!(serde_json::from_str::<FgMultFunction>(&bad).is_err());
        let overlapping = r#"{"classes":[{"spec":{"type":"residue","mod":4,"residues":[1]},"phase":{"type":"rational","num":1,"den":2}},{"spec":{"type":"residue","mod":8,"residues":[5]},"phase":{"type":"rational","num":0,"den":1}},{"spec":{"type":"default"},"phase":{"type":"rational","num":0,"den":1}}]}"#;
        let err = serde_json::from_str::<FgMultFunction>(overlapping).unwrap_err();
        assert!(err.to_string().contains("overlap"));
    }
}
