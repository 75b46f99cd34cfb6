//! Mode-based multiplicative systems.
//!
//! An observable is a finite Fourier series `F = Σ c_j e_j` on either a finite
//! cyclic group or the circle. A multiplicative system acts on mode `j` by a
//! completely multiplicative unimodular multiplier `g_j(n)`, so every Haar
//! integral is a coefficient read and every ergodic average is a scalar sum
//! over `n`.

mod average;
mod classify;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::Sieve;
use crate::error::{ensure, Error, Result};
use crate::phase::UnitPhase;
use crate::pretend::{FgAddFunction, FgMultFunction, PhaseKernel, RootTable, Turn};
pub(crate) use average::check_schedule;

pub use average::{
    aperiodicity_quantities, distance_system, ergodic_average, koopman_apply, predicted_limit, wm_average,
    AperiodicityQuantities, AverageTrace, TracePoint,
};
pub use classify::{
    classify_system, project_aperiodic, project_pr_rat, project_pretentious, sigma_pr_rat_tilde, sigma_rat,
    spectral_measure, Classification, SpectralAtom, SpectralMeasure,
};

/// State space of a system, seen through its characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpace {
    /// `ℤ/kℤ`, modes `0..k`.
    FiniteCyclic { order: u64 },
    /// The circle, modes `|j| ≤ band`.
    Torus { band: u64 },
}

impl ModeSpace {
    pub fn validate(&self) -> Result<()> {
        if let ModeSpace::FiniteCyclic { order } = self {
            ensure!(*order >= 1, Validation, "cyclic mode space needs order ≥ 1");
        }
        Ok(())
    }

    pub fn contains(&self, j: i64) -> bool {
        match *self {
            ModeSpace::FiniteCyclic { order } => j >= 0 && (j as u64) < order,
            ModeSpace::Torus { band } => j.unsigned_abs() <= band,
        }
    }

    /// All admissible modes in increasing order.
    pub fn modes(&self) -> Vec<i64> {
        match *self {
            ModeSpace::FiniteCyclic { order } => (0..order as i64).collect(),
            ModeSpace::Torus { band } => (-(band as i64)..=band as i64).collect(),
        }
    }

    /// Admissible modes other than 0.
    pub fn nonzero_modes(&self) -> Vec<i64> {
        self.modes().into_iter().filter(|&j| j != 0).collect()
    }
}

/// `F = Σ_j c_j e_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModeFunction", into = "RawModeFunction")]
pub struct ModeFunction {
    space: ModeSpace,
    coeffs: BTreeMap<i64, Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModeFunction {
    space: ModeSpace,
    coeffs: Vec<RawCoeff>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoeff {
    mode: i64,
    re: f64,
    im: f64,
}

impl TryFrom<RawModeFunction> for ModeFunction {
    type Error = Error;
    fn try_from(raw: RawModeFunction) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for c in raw.coeffs {
            ensure!(c.re.is_finite() && c.im.is_finite(), Validation, "coefficient of mode {} is not finite", c.mode);
            ensure!(
                coeffs.insert(c.mode, Complex64::new(c.re, c.im)).is_none(),
                Validation,
                "mode {} listed twice",
                c.mode
            );
        }
        ModeFunction::new(raw.space, coeffs)
    }
}

impl From<ModeFunction> for RawModeFunction {
    fn from(f: ModeFunction) -> Self {
        RawModeFunction {
            space: f.space,
            coeffs: f.coeffs.into_iter().map(|(mode, c)| RawCoeff { mode, re: c.re, im: c.im }).collect(),
        }
    }
}

impl ModeFunction {
    pub fn new(space: ModeSpace, coeffs: BTreeMap<i64, Complex64>) -> Result<Self> {
        space.validate()?;
        for &j in coeffs.keys() {
            ensure!(space.contains(j), Validation, "mode {j} lies outside {space:?}");
        }
        Ok(ModeFunction { space, coeffs })
    }

    /// A single mode with coefficient `c`.
    pub fn mode(space: ModeSpace, j: i64, c: Complex64) -> Result<Self> {
        Self::new(space, BTreeMap::from([(j, c)]))
    }

    pub fn zero(space: ModeSpace) -> Self {
        ModeFunction { space, coeffs: BTreeMap::new() }
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, j: i64) -> Complex64 {
        self.coeffs.get(&j).copied().unwrap_or_default()
    }

    /// `∫ F dμ`.
    pub fn integral(&self) -> Complex64 {
        self.coeff(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Same support, coefficients mapped by `op(j, c_j)`.
    pub fn map(&self, op: impl Fn(i64, Complex64) -> Complex64) -> Self {
        ModeFunction { space: self.space, coeffs: self.coeffs.iter().map(|(&j, &c)| (j, op(j, c))).collect() }
    }

    /// Keeps the modes selected by `keep`.
    pub fn filter(&self, keep: impl Fn(i64) -> bool) -> Self {
        ModeFunction {
            space: self.space,
            coeffs: self.coeffs.iter().filter(|(&j, _)| keep(j)).map(|(&j, &c)| (j, c)).collect(),
        }
    }

    /// `‖F − G‖₂` over the union of supports.
    pub fn l2_distance(&self, other: &ModeFunction) -> f64 {
        let mut sum = 0.0;
        for (&j, &c) in &self.coeffs {
            sum += (c - other.coeff(j)).norm_sqr();
        }
        for (&j, &c) in &other.coeffs {
            if !self.coeffs.contains_key(&j) {
                sum += c.norm_sqr();
            }
        }
        sum.sqrt()
    }
}

/// Rotation `x ↦ x + β` on `ℤ/qℤ` (β = r/q) or on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAddSystem", into = "RawAddSystem")]
pub struct AddSystem {
    angle: UnitPhase,
    band: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddSystem {
    angle: UnitPhase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    band: Option<u64>,
}

impl TryFrom<RawAddSystem> for AddSystem {
    type Error = Error;
    fn try_from(raw: RawAddSystem) -> Result<Self> {
        AddSystem::new(raw.angle, raw.band)
    }
}

impl From<AddSystem> for RawAddSystem {
    fn from(t: AddSystem) -> Self {
        RawAddSystem { angle: t.angle, band: t.band }
    }
}

impl AddSystem {
    /// An irrational angle needs a mode band.
    pub fn new(angle: UnitPhase, band: Option<u64>) -> Result<Self> {
        ensure!(
            angle.is_rational() || band.is_some(),
            Validation,
            "rotation by an irrational angle needs a declared mode band"
        );
        Ok(AddSystem { angle, band })
    }

    pub fn angle(&self) -> UnitPhase {
        self.angle
    }

    pub fn space(&self) -> ModeSpace {
        match self.angle {
            UnitPhase::Rational(r) => ModeSpace::FiniteCyclic { order: r.den() },
            UnitPhase::Irrational(_) => ModeSpace::Torus { band: self.band.unwrap_or(0) },
        }
    }

    /// Rotation by a nonzero rational or by an irrational angle.
    pub fn is_ergodic(&self) -> bool {
        !self.angle.is_one()
    }

    /// `nβ` in turns.
    pub(crate) fn turn(&self, n: u64) -> Turn {
        match self.angle {
            UnitPhase::Rational(r) => {
                let q = r.den();
                Turn { idx: (r.num() as u128 * n as u128 % q as u128) as u64, den: q, irr: 0.0 }
            }
            UnitPhase::Irrational(b) => {
                let x = b * n as f64;
                Turn { idx: 0, den: 1, irr: x - x.floor() }
            }
        }
    }

    pub(crate) fn turn_den(&self) -> u64 {
        match self.angle {
            UnitPhase::Rational(r) => r.den(),
            UnitPhase::Irrational(_) => 1,
        }
    }
}

/// A finitely generated multiplicative system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawMultSystem", into = "RawMultSystem")]
pub enum MultSystem {
    /// `S_n x = f(n) x` on the closure of `f(ℕ)`.
    Rotation { generator: FgMultFunction, band: Option<u64> },
    /// `S_n = T^{a(n)}` for an additive rotation `T`.
    Skew { base: AddSystem, a: FgAddFunction },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawMultSystem {
    Rotation {
        generator: FgMultFunction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        band: Option<u64>,
    },
    Skew {
        base: AddSystem,
        a: FgAddFunction,
    },
}

impl TryFrom<RawMultSystem> for MultSystem {
    type Error = Error;
    fn try_from(raw: RawMultSystem) -> Result<Self> {
        match raw {
            RawMultSystem::Rotation { generator, band } => MultSystem::rotation(generator, band),
            RawMultSystem::Skew { base, a } => Ok(MultSystem::Skew { base, a }),
        }
    }
}

impl From<MultSystem> for RawMultSystem {
    fn from(s: MultSystem) -> Self {
        match s {
            MultSystem::Rotation { generator, band } => RawMultSystem::Rotation { generator, band },
            MultSystem::Skew { base, a } => RawMultSystem::Skew { base, a },
        }
    }
}

impl MultSystem {
    /// A rotation with any irrational phase lives on the circle and needs a band.
    pub fn rotation(generator: FgMultFunction, band: Option<u64>) -> Result<Self> {
        ensure!(
            generator.is_rational() || band.is_some(),
            Validation,
            "rotation with irrational phases needs a declared mode band"
        );
        Ok(MultSystem::Rotation { generator, band })
    }

    pub fn skew(base: AddSystem, a: FgAddFunction) -> Self {
        MultSystem::Skew { base, a }
    }

    pub fn space(&self) -> ModeSpace {
        match self {
            MultSystem::Rotation { generator, band } => {
                if generator.is_rational() {
                    ModeSpace::FiniteCyclic { order: generator.rational_order() }
                } else {
                    ModeSpace::Torus { band: band.unwrap_or(0) }
                }
            }
            MultSystem::Skew { base, .. } => base.space(),
        }
    }

    /// The multiplier `g_j` by which `S_n` acts on mode `j`.
    pub fn multiplier(&self, j: i64) -> FgMultFunction {
        match self {
            MultSystem::Rotation { generator, .. } => generator.pow(j),
            MultSystem::Skew { base, a } => a.exp_twist(base.angle().pow(j)),
        }
    }

    pub(crate) fn check_function(&self, f: &ModeFunction) -> Result<()> {
        let space = self.space();
        ensure!(
            f.space() == space,
            Precondition,
            "observable lives on {:?} but the system acts on {space:?}",
            f.space()
        );
        Ok(())
    }

    pub(crate) fn angle_kernel(&self) -> AngleKernel<'_> {
        match self {
            MultSystem::Rotation { generator, .. } => {
                AngleKernel::Rotation(PhaseKernel::new(generator, generator.rational_order()))
            }
            MultSystem::Skew { base, a } => match base.angle() {
                UnitPhase::Rational(r) => AngleKernel::SkewRational { a, num: r.num(), den: r.den() },
                UnitPhase::Irrational(b) => AngleKernel::SkewIrrational { a, beta: b },
            },
        }
    }
}

/// `θ(n)` with `g_j(n) = e(j θ(n))`.
pub(crate) enum AngleKernel<'a> {
    Rotation(PhaseKernel<'a>),
    SkewRational { a: &'a FgAddFunction, num: u64, den: u64 },
    SkewIrrational { a: &'a FgAddFunction, beta: f64 },
}

impl AngleKernel<'_> {
    pub(crate) fn den(&self) -> u64 {
        match self {
            AngleKernel::Rotation(k) => k.den(),
            AngleKernel::SkewRational { den, .. } => *den,
            AngleKernel::SkewIrrational { .. } => 1,
        }
    }

    #[inline]
    pub(crate) fn turn(&self, sieve: &Sieve, n: u64) -> Turn {
        match self {
            AngleKernel::Rotation(k) => k.turn(sieve, n),
            AngleKernel::SkewRational { a, num, den } => {
                let v = a.eval(sieve, n) as i128 * *num as i128;
                Turn { idx: v.rem_euclid(*den as i128) as u64, den: *den, irr: 0.0 }
            }
            AngleKernel::SkewIrrational { a, beta } => {
                let x = a.eval(sieve, n) as f64 * beta;
                Turn { idx: 0, den: 1, irr: x - x.floor() }
            }
        }
    }
}

/// Evaluates `e(Σ_i k_i θ_i)` for turns with fixed denominators, exactly on the rational part.
pub(crate) struct Mixer {
    den: u64,
    scales: Vec<u64>,
    roots: RootTable,
}

impl Mixer {
    pub(crate) fn new(dens: &[u64]) -> Self {
        let den = dens.iter().fold(1u64, |acc, &d| num_integer::Integer::lcm(&acc, &d));
        Mixer { den, scales: dens.iter().map(|d| den / d).collect(), roots: RootTable::new(den) }
    }

    #[inline]
    pub(crate) fn eval(&self, parts: &[(i64, Turn)]) -> Complex64 {
        let mut idx: i128 = 0;
        let mut irr = 0.0;
        for (&(k, t), &s) in parts.iter().zip(&self.scales) {
            idx += k as i128 * t.idx as i128 * s as i128;
            irr += k as f64 * t.irr;
        }
        let idx = idx.rem_euclid(self.den as i128) as u64;
        if irr == 0.0 {
            self.roots.get(idx, 0.0)
        } else {
            self.roots.get(idx, irr - irr.floor())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PrimeSet;

    #[test]
    fn json_round_trips() {
        let s = MultSystem::skew(
            AddSystem::new(UnitPhase::irrational(0.5f64.sqrt() - 0.5).unwrap(), Some(3)).unwrap(),
            FgAddFunction::big_omega(),
        );
        let txt = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<MultSystem>(&txt).unwrap(), s);
        let r = MultSystem::rotation(FgMultFunction::liouville(), None).unwrap();
        let txt = serde_json::to_string(&r).unwrap();
        assert_eq!(txt, r#"{"type":"rotation","generator":{"classes":[{"spec":{"type":"default"},"phase":{"type":"rational","num":1,"den":2}}]}}"#);
        assert_eq!(serde_json::from_str::<MultSystem>(&txt).unwrap(), r);
        let f = ModeFunction::mode(ModeSpace::Torus { band: 2 }, -2, Complex64::new(0.1, -1e-300)).unwrap();
        let txt = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<ModeFunction>(&txt).unwrap(), f);
    }

    #[test]
    fn validation() {
        let irr = FgMultFunction::on_set(PrimeSet::explicit(vec![2]).unwrap(), UnitPhase::irrational(0.3).unwrap())
            .unwrap();
        assert!(MultSystem::rotation(irr.clone(), None).is_err());
        assert_eq!(MultSystem::rotation(irr, Some(4)).unwrap().space(), ModeSpace::Torus { band: 4 });
        assert!(AddSystem::new(UnitPhase::irrational(0.3).unwrap(), None).is_err());
        assert!(ModeFunction::mode(ModeSpace::FiniteCyclic { order: 2 }, 2, Complex64::new(1.0, 0.0)).is_err());
        assert!(serde_json::from_str::<ModeFunction>(
            r#"{"space":{"type":"finite_cyclic","order":3},"coeffs":[{"mode":1,"re":1,"im":0},{"mode":1,"re":0,"im":0}]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<MultSystem>(r#"{"type":"rotation","generator":{"classes":[{"spec":{"type":"default"},"phase":{"type":"rational","num":0,"den":1}}]},"extra":1}"#).is_err());
    }

    #[test]
    fn spaces_and_multipliers() {
        let lam = MultSystem::rotation(FgMultFunction::liouville(), None).unwrap();
        assert_eq!(lam.space(), ModeSpace::FiniteCyclic { order: 2 });
        assert_eq!(lam.multiplier(1), FgMultFunction::liouville());
        let sk = MultSystem::skew(AddSystem::new(UnitPhase::rational(1, 2).unwrap(), None).unwrap(), FgAddFunction::big_omega());
        assert_eq!(sk.space(), ModeSpace::FiniteCyclic { order: 2 });
        assert_eq!(sk.multiplier(1), FgMultFunction::liouville());
        assert_eq!(ModeSpace::Torus { band: 1 }.modes(), vec![-1, 0, 1]);
    }

    #[test]
    fn mixer_is_exact_on_rationals() {
        let m = Mixer::new(&[3, 4]);
        let a = Turn { idx: 1, den: 3, irr: 0.0 };
        let b = Turn { idx: 1, den: 4, irr: 0.0 };
        // 2·(1/3) − 1/4 = 5/12
        assert_eq!(m.eval(&[(2, a), (-1, b)]), crate::phase::turn_to_complex(5, 12));
        let c = Turn { idx: 0, den: 1, irr: 0.25 };
        let m2 = Mixer::new(&[1, 4]);
        assert!((m2.eval(&[(3, c), (1, b)]) - crate::phase::e(1.0)).norm() < 1e-12);
    }
}
