//! Projections, spectra and the ergodic/aperiodic classification.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;

use super::{AddSystem, ModeFunction, ModeSpace, MultSystem};
use crate::error::Result;
use crate::phase::{Ratio01, UnitPhase};
use crate::pretend::{distance_is_finite, is_aperiodic_fn, pretends_character, FgMultFunction};

/// Keeps the modes `j` with `𝔻(g_j, f) < ∞`.
pub fn project_pretentious(s: &MultSystem, f: &ModeFunction, weight: &FgMultFunction) -> Result<ModeFunction> {
    s.check_function(f)?;
    Ok(f.filter(|j| distance_is_finite(&s.multiplier(j), weight).is_finite()))
}

fn pretends_some_character(s: &MultSystem, j: i64) -> Result<bool> {
    Ok(pretends_character(&s.multiplier(j))?.is_some())
}

/// Component of `F` on the modes whose multiplier pretends a Dirichlet character.
pub fn project_pr_rat(s: &MultSystem, f: &ModeFunction) -> Result<ModeFunction> {
    s.check_function(f)?;
    let mut keep = BTreeSet::new();
    for &j in f.coeffs().keys() {
        if pretends_some_character(s, j)? {
            keep.insert(j);
        }
    }
    Ok(f.filter(|j| keep.contains(&j)))
}

/// Component of `F` on the modes whose multiplier is aperiodic.
pub fn project_aperiodic(s: &MultSystem, f: &ModeFunction) -> Result<ModeFunction> {
    let pr = project_pr_rat(s, f)?;
    Ok(f.filter(|j| !pr.coeffs().contains_key(&j)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub pretentiously_ergodic: bool,
    pub aperiodic: bool,
    /// Always false: no mode system here is pretentiously weak-mixing.
    pub pretentiously_weak_mixing: bool,
    pub space: ModeSpace,
    /// Nonzero modes the verdicts quantify over.
    pub modes_checked: usize,
}

/// Mode-level classification: ergodic iff every nonzero mode multiplier is
/// infinitely far from 1, aperiodic iff every one of them is aperiodic. On the
/// circle the quantifier runs over the declared band.
pub fn classify_system(s: &MultSystem) -> Result<Classification> {
    let space = s.space();
    let modes = space.nonzero_modes();
    let one = FgMultFunction::one();
    let mut ergodic = true;
    let mut aperiodic = true;
    for &j in &modes {
        let g = s.multiplier(j);
        ergodic &= !distance_is_finite(&g, &one).is_finite();
        aperiodic &= is_aperiodic_fn(&g)?;
    }
    Ok(Classification {
        pretentiously_ergodic: ergodic,
        aperiodic,
        pretentiously_weak_mixing: false,
        space,
        modes_checked: modes.len(),
    })
}

/// Rational eigenvalues of an additive rotation: multiples of `β` for rational `β`, else `{0}`.
pub fn sigma_rat(t: &AddSystem) -> Vec<Ratio01> {
    match t.angle() {
        UnitPhase::Rational(b) => {
            let set: BTreeSet<Ratio01> = (0..b.den() as i64).map(|j| b.scale(j)).collect();
            set.into_iter().collect()
        }
        UnitPhase::Irrational(_) => vec![Ratio01::ZERO],
    }
}

/// `{0} ∪ {r/q₀ : (r, q₀) = 1}` over the conductors `q₀` of characters pretended by the mode multipliers.
pub fn sigma_pr_rat_tilde(s: &MultSystem) -> Result<Vec<Ratio01>> {
    let mut out = BTreeSet::from([Ratio01::ZERO]);
    for j in s.space().modes() {
        if let Some(m) = pretends_character(&s.multiplier(j))? {
            let q0 = m.character.conductor();
            for r in (0..q0).filter(|r| r.gcd(&q0) == 1) {
                out.insert(Ratio01::new(r as i64, q0)?);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Atom of the spectral measure of `F`: a mode multiplier and its mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralAtom {
    pub multiplier: FgMultFunction,
    pub modes: Vec<i64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub atoms: Vec<SpectralAtom>,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// `μ_F = Σ_j |c_j|² δ_{g_j}`, with coinciding multipliers merged.
pub fn spectral_measure(s: &MultSystem, f: &ModeFunction) -> Result<SpectralMeasure> {
    s.check_function(f)?;
    let mut atoms: Vec<SpectralAtom> = Vec::new();
    for (&j, c) in f.coeffs() {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let g = s.multiplier(j);
        match atoms.iter_mut().find(|a| a.multiplier == g) {
            Some(a) => {
                a.modes.push(j);
                a.weight += w;
            }
            None => atoms.push(SpectralAtom { multiplier: g, modes: vec![j], weight: w }),
        }
    }
    Ok(SpectralMeasure { atoms })
}
