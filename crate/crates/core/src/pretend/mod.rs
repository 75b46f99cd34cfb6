//! Finitely generated multiplicative functions: distances, mean values and
//! the decisions "pretends to be 1 / a character".

mod function;
mod partition;

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

pub use function::{FgAddFunction, FgMultFunction, Turn};
pub(crate) use function::{PhaseKernel, RootTable};
pub(crate) use partition::reduced_residues;

use crate::arith::{factor_small, Sieve};
use crate::characters::{characters_mod, DirichletCharacter};
use crate::error::{ensure, Result};
use crate::phase::{Ratio01, UnitPhase};
use crate::reduce::reduce_range;

/// `1 − Re(u·v̄)` for two phases, exact on rational inputs up to rounding of the cosine.
pub(crate) fn phase_gap(u: UnitPhase, v: UnitPhase) -> f64 {
    match (u, v) {
        (UnitPhase::Rational(a), UnitPhase::Rational(b)) => {
            let d = a.add(b.neg());
            if d.is_zero() {
                0.0
            } else {
                1.0 - d.to_complex().re
            }
        }
        _ if u == v => 0.0,
        _ => 1.0 - (u.to_complex() * v.to_complex().conj()).re,
    }
}

/// `𝔻(f, g; N)`.
pub fn distance_partial(f: &FgMultFunction, g: &FgMultFunction, sieve: &Sieve, n: u64) -> Result<f64> {
    ensure!(n >= 2, Domain, "distance needs N ≥ 2, got {n}");
    sieve.check_covers(n)?;
    let (pf, pg) = (f.partition(), g.partition());
    let mut gaps = vec![f64::NAN; pf.len() * pg.len()];
    let mut sum = 0.0;
    for &p in sieve.primes_up_to(n) {
        let p = p as u64;
        let (i, j) = (pf.class_of_prime(p), pg.class_of_prime(p));
        let slot = &mut gaps[i * pg.len() + j];
        if slot.is_nan() {
            *slot = phase_gap(f.phase_of_class(i), g.phase_of_class(j));
        }
        sum += *slot / p as f64;
    }
    Ok(sum.sqrt())
}

/// Outcome of deciding whether `𝔻(f, g) < ∞`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DistanceVerdict {
    /// `f(p) = g(p)` except on the listed primes.
    Finite { exceptional: Vec<u64> },
    /// `f(p) ≠ g(p)` for almost every prime `≡ residue (mod modulus)`.
    Infinite { modulus: u64, residue: u64 },
}

impl DistanceVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, DistanceVerdict::Finite { .. })
    }
}

/// Primes that are not governed by the residue cells mod `m`: explicit primes and divisors of `m`.
fn special_primes(fs: &[&FgMultFunction], m: u64) -> BTreeSet<u64> {
    let mut out: BTreeSet<u64> = factor_small(m).into_iter().map(|(p, _)| p).collect();
    for f in fs {
        out.extend(f.partition().explicit_primes());
    }
    out
}

/// Decides `𝔻(f, g) < ∞` by comparing phases on every reduced residue class
/// modulo the common refinement of both partitions.
pub fn distance_is_finite(f: &FgMultFunction, g: &FgMultFunction) -> DistanceVerdict {
    let m = f.class_modulus().lcm(&g.class_modulus());
    for r in reduced_residues(m) {
        if f.at_residue(r) != g.at_residue(r) {
            return DistanceVerdict::Infinite { modulus: m, residue: r };
        }
    }
    let exceptional = special_primes(&[f, g], m)
        .into_iter()
        .filter(|&p| f.at_prime(p) != g.at_prime(p))
        .collect();
    DistanceVerdict::Finite { exceptional }
}

/// `∏_{p∈W} (1 − 1/p)(1 − f(p)/p)^{-1}` over a finite set of primes.
pub(crate) fn euler_factor_product(primes: &[u64], value: impl Fn(u64) -> Complex64) -> Complex64 {
    primes.iter().fold(Complex64::new(1.0, 0.0), |acc, &p| {
        let pf = p as f64;
        acc * (1.0 - 1.0 / pf) / (Complex64::new(1.0, 0.0) - value(p) / pf)
    })
}

/// Mean value `M(f)`: zero unless `f` pretends to be 1, otherwise the finite Euler product.
pub fn halasz_mean(f: &FgMultFunction) -> Complex64 {
    match distance_is_finite(f, &FgMultFunction::one()) {
        DistanceVerdict::Infinite { .. } => Complex64::new(0.0, 0.0),
        DistanceVerdict::Finite { exceptional } => euler_factor_product(&exceptional, |p| f.at_prime(p).to_complex()),
    }
}

/// `(1/N) Σ_{n≤N} f(n) w(n)` where the weight contributes `extra(n)/den` turns, or vanishes on `None`.
fn weighted_mean(
    f: &FgMultFunction,
    sieve: &Sieve,
    n: u64,
    den: u64,
    extra: impl Fn(u64) -> Option<u64> + Sync + Send,
) -> Result<Complex64> {
    ensure!(n >= 1, Domain, "mean needs N ≥ 1");
    sieve.check_covers(n)?;
    let den = den.lcm(&f.rational_order());
    let kernel = PhaseKernel::new(f, den);
    let roots = RootTable::new(den);
    let sum = reduce_range(
        1,
        n,
        || Complex64::new(0.0, 0.0),
        |acc, k| {
            if let Some(x) = extra(k) {
                let t = kernel.turn(sieve, k);
                *acc += roots.get(t.idx + x, t.irr);
            }
        },
        |a, b| a + b,
    );
    Ok(sum / n as f64)
}

/// `(1/N) Σ_{n≤N} f(n)`.
pub fn partial_mean(f: &FgMultFunction, sieve: &Sieve, n: u64) -> Result<Complex64> {
    weighted_mean(f, sieve, n, 1, |_| Some(0))
}

/// `(1/N) Σ_{n≤N} f(n) e(rn/q)`.
pub fn partial_mean_twisted(f: &FgMultFunction, sieve: &Sieve, n: u64, r: u64, q: u64) -> Result<Complex64> {
    ensure!(q >= 1, Domain, "twist modulus must be positive");
    let den = q.lcm(&f.rational_order());
    let step = den / q;
    let r = r % q;
    weighted_mean(f, sieve, n, den, move |k| Some((r as u128 * k as u128 % q as u128) as u64 * step))
}

/// `(1/N) Σ_{n≤N} f(n) χ(n)`.
pub fn partial_mean_character(
    f: &FgMultFunction,
    chi: &DirichletCharacter,
    sieve: &Sieve,
    n: u64,
) -> Result<Complex64> {
    let den = chi.order().lcm(&f.rational_order());
    weighted_mean(f, sieve, n, den, move |k| chi.value(k).map(|v| v.over(den)))
}

/// A character `χ` with `𝔻(f, χ) < ∞`, and the primes where `f(p) ≠ χ*(p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterMatch {
    pub character: DirichletCharacter,
    pub exceptional: Vec<u64>,
}

/// Phases of `f` on the reduced residues mod `m`, or `None` if any is irrational.
fn rational_cells(f: &FgMultFunction, m: u64) -> Option<Vec<(u64, Ratio01)>> {
    reduced_residues(m)
        .map(|r| match f.at_residue(r) {
            UnitPhase::Rational(v) => Some((r, v)),
            UnitPhase::Irrational(_) => None,
        })
        .collect()
}

/// Searches the characters modulo the class modulus of `f` for one that `f` pretends to be.
///
/// A character agreeing with `f` on almost all primes is trivial on units
/// `≡ 1` mod the class modulus, so this search is complete.
pub fn pretends_character(f: &FgMultFunction) -> Result<Option<CharacterMatch>> {
    let m = f.class_modulus();
    let Some(cells) = rational_cells(f, m) else {
        return Ok(None);
    };
    for chi in characters_mod(m)? {
        if cells.iter().all(|&(r, v)| chi.value(r) == Some(v)) {
            let star = chi.modified();
            let exceptional = special_primes(&[f], m)
                .into_iter()
                .filter(|&p| f.at_prime(p) != star.at_prime(p))
                .collect();
            return Ok(Some(CharacterMatch { character: chi, exceptional }));
        }
    }
    Ok(None)
}

/// `f` is aperiodic iff it pretends no Dirichlet character.
pub fn is_aperiodic_fn(f: &FgMultFunction) -> Result<bool> {
    Ok(pretends_character(f)?.is_none())
}
