//! Koopman action and averaging along `n`.

use num_complex::Complex64;
use serde::Serialize;

use super::{ModeFunction, MultSystem, Mixer};
use crate::arith::{euler_phi, Sieve};
use crate::characters::characters_mod;
use crate::error::{ensure, Result};
use crate::pretend::{distance_is_finite, euler_factor_product, DistanceVerdict, FgMultFunction, PhaseKernel, Turn};
use crate::reduce::{add_vec, reduce_range, reduce_schedule};

/// `S_n F`: mode `j` is multiplied by `g_j(n)`.
pub fn koopman_apply(s: &MultSystem, sieve: &Sieve, n: u64, f: &ModeFunction) -> Result<ModeFunction> {
    ensure!(n >= 1, Domain, "S_n needs n ≥ 1");
    sieve.check_covers(n)?;
    s.check_function(f)?;
    let kernel = s.angle_kernel();
    let mixer = Mixer::new(&[kernel.den()]);
    let theta = kernel.turn(sieve, n);
    Ok(f.map(|j, c| c * mixer.eval(&[(j, theta)])))
}

/// Averages of `F` at one schedule point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub n: u64,
    pub average: ModeFunction,
    pub l2_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageTrace {
    pub predicted: ModeFunction,
    pub points: Vec<TracePoint>,
}

pub(crate) fn check_schedule(schedule: &[u64], sieve: &Sieve) -> Result<()> {
    ensure!(!schedule.is_empty(), Domain, "empty N-schedule");
    ensure!(schedule[0] >= 1, Domain, "schedule points must be ≥ 1");
    ensure!(schedule.windows(2).all(|w| w[0] < w[1]), Domain, "schedule must be strictly increasing");
    sieve.check_covers(*schedule.last().unwrap())
}

/// Per-mode sums `Σ_{n≤N} conj(f(n)) g_j(n)` at every schedule point.
fn mode_sums(
    s: &MultSystem,
    modes: &[i64],
    weight: &FgMultFunction,
    sieve: &Sieve,
    schedule: &[u64],
) -> Vec<Vec<Complex64>> {
    let angle = s.angle_kernel();
    let wk = PhaseKernel::new(weight, weight.rational_order());
    let mixer = Mixer::new(&[angle.den(), wk.den()]);
    reduce_schedule(
        schedule,
        || vec![Complex64::new(0.0, 0.0); modes.len()],
        |acc, n| {
            let theta = angle.turn(sieve, n);
            let w = wk.turn(sieve, n);
            for (slot, &j) in acc.iter_mut().zip(modes) {
                *slot += mixer.eval(&[(j, theta), (-1, w)]);
            }
        },
        add_vec,
    )
}

/// Limit of the weighted averages: mode `j` survives iff `𝔻(g_j, f) < ∞`, scaled by a
/// finite Euler product over the primes where `g_j(p) ≠ f(p)`.
pub fn predicted_limit(s: &MultSystem, f: &ModeFunction, weight: Option<&FgMultFunction>) -> Result<ModeFunction> {
    s.check_function(f)?;
    let one = FgMultFunction::one();
    let w = weight.unwrap_or(&one);
    let mut out = Vec::new();
    for (&j, &c) in f.coeffs() {
        let g = s.multiplier(j);
        let factor = match distance_is_finite(&g, w) {
            DistanceVerdict::Infinite { .. } => Complex64::new(0.0, 0.0),
            DistanceVerdict::Finite { exceptional } => euler_factor_product(&exceptional, |p| {
                g.at_prime(p).to_complex() * w.at_prime(p).to_complex().conj()
            }),
        };
        out.push((j, c * factor));
    }
    ModeFunction::new(f.space(), out.into_iter().collect())
}

/// `(1/N) Σ_{n≤N} conj(f(n)) S_n F` along the schedule, with the L² distance to the predicted limit.
pub fn ergodic_average(
    s: &MultSystem,
    f: &ModeFunction,
    weight: Option<&FgMultFunction>,
    sieve: &Sieve,
    schedule: &[u64],
) -> Result<AverageTrace> {
    check_schedule(schedule, sieve)?;
    let predicted = predicted_limit(s, f, weight)?;
    let one = FgMultFunction::one();
    let modes: Vec<i64> = f.coeffs().keys().copied().collect();
    let sums = mode_sums(s, &modes, weight.unwrap_or(&one), sieve, schedule);
    let points = schedule
        .iter()
        .zip(sums)
        .map(|(&n, sum)| {
            let average = f.map(|j, c| {
                let i = modes.binary_search(&j).unwrap();
                c * sum[i] / n as f64
            });
            let l2_error = average.l2_distance(&predicted);
            TracePoint { n, average, l2_error }
        })
        .collect();
    Ok(AverageTrace { predicted, points })
}

/// `𝔻_F(S, f; N) = (Σ_{p≤N} (‖F‖² − Re Σ_j |c_j|² g_j(p) conj(f(p)))/p)^{1/2}`.
pub fn distance_system(s: &MultSystem, f: &ModeFunction, weight: &FgMultFunction, sieve: &Sieve, n: u64) -> Result<f64> {
    s.check_function(f)?;
    ensure!(f.norm_sq() > 0.0, Precondition, "distance to a system needs a nonzero observable");
    ensure!(n >= 2, Domain, "distance needs N ≥ 2, got {n}");
    sieve.check_covers(n)?;
    let mass = f.norm_sq();
    let angle = s.angle_kernel();
    let wk = PhaseKernel::new(weight, weight.rational_order());
    let mixer = Mixer::new(&[angle.den(), wk.den()]);
    let spectrum: Vec<(i64, f64)> = f.coeffs().iter().map(|(&j, c)| (j, c.norm_sqr())).collect();
    let mut sum = 0.0;
    for &p in sieve.primes_up_to(n) {
        let p = p as u64;
        let theta = angle.turn(sieve, p);
        let w = wk.turn(sieve, p);
        let overlap: f64 = spectrum.iter().map(|&(j, m)| m * mixer.eval(&[(j, theta), (-1, w)]).re).sum();
        sum += (mass - overlap) / p as f64;
    }
    Ok(sum.max(0.0).sqrt())
}

/// `(1/N) Σ_{n≤N} |⟨S_n F, F⟩ − |∫F|²|`.
pub fn wm_average(s: &MultSystem, f: &ModeFunction, sieve: &Sieve, n: u64) -> Result<f64> {
    s.check_function(f)?;
    ensure!(n >= 1, Domain, "average needs N ≥ 1");
    sieve.check_covers(n)?;
    let angle = s.angle_kernel();
    let mixer = Mixer::new(&[angle.den()]);
    let spectrum: Vec<(i64, f64)> = f.coeffs().iter().filter(|(&j, _)| j != 0).map(|(&j, c)| (j, c.norm_sqr())).collect();
    let total = reduce_range(
        1,
        n,
        || 0.0,
        |acc, k| {
            let theta = angle.turn(sieve, k);
            let corr: Complex64 = spectrum.iter().map(|&(j, m)| m * mixer.eval(&[(j, theta)])).sum();
            *acc += corr.norm();
        },
        |a, b| a + b,
    );
    Ok(total / n as f64)
}

/// The three quantities whose vanishing characterizes aperiodicity of `F` modulo `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AperiodicityQuantities {
    pub q: u64,
    pub n: u64,
    /// `max_r ‖(1/N) Σ_{n≤N} S_{qn+r} F − ∫F‖₂` over `1 ≤ r ≤ q`.
    pub progressions: f64,
    /// `max_r ‖(1/N) Σ_{n≤N} e(rn/q) S_n F − [q|r] ∫F‖₂` over `1 ≤ r ≤ q`.
    pub twisted: f64,
    /// `max_χ ‖(1/N) Σ_{n≤N} χ(n) S_n F − [χ = χ₀] (φ(q)/q) ∫F‖₂` over characters mod `q`.
    pub characters: f64,
}

/// L² distance between `Σ_j c_j sums_j / N` and `target` placed on mode 0.
fn residual(f: &ModeFunction, modes: &[i64], sums: &[Complex64], n: u64, target: Complex64) -> f64 {
    modes
        .iter()
        .zip(sums)
        .map(|(&j, &s)| {
            let v = f.coeff(j) * s / n as f64;
            let t = if j == 0 { target } else { Complex64::new(0.0, 0.0) };
            (v - t).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

pub fn aperiodicity_quantities(
    s: &MultSystem,
    f: &ModeFunction,
    q: u64,
    sieve: &Sieve,
    n: u64,
) -> Result<AperiodicityQuantities> {
    s.check_function(f)?;
    ensure!(q >= 1 && n >= 1, Domain, "need q ≥ 1 and N ≥ 1");
    sieve.check_covers(q * (n + 1))?;
    let chars = characters_mod(q)?;
    let modes: Vec<i64> = f.coeffs().keys().copied().collect();
    let nm = modes.len();
    let angle = s.angle_kernel();
    let char_den = chars.iter().fold(1u64, |acc, c| num_integer::Integer::lcm(&acc, &c.order()));
    let mixer = Mixer::new(&[angle.den(), q, char_den]);
    let zero = Turn { idx: 0, den: 1, irr: 0.0 };
    let q_usize = q as usize;
    // progression sums indexed by (m mod q, mode) for m in q+1..=qN+q
    let prog = reduce_range(
        q + 1,
        q * n + q,
        || vec![Complex64::new(0.0, 0.0); q_usize * nm],
        |acc, m| {
            let theta = angle.turn(sieve, m);
            let r = (m % q) as usize;
            for (i, &j) in modes.iter().enumerate() {
                acc[r * nm + i] += mixer.eval(&[(j, theta), (0, zero), (0, zero)]);
            }
        },
        add_vec,
    );
    // twisted sums for r = 1..=q, then character sums
    let slots = q_usize + chars.len();
    let twisted = reduce_range(
        1,
        n,
        || vec![Complex64::new(0.0, 0.0); slots * nm],
        |acc, k| {
            let theta = angle.turn(sieve, k);
            for r in 1..=q {
                let t = Turn { idx: (r * k) % q, den: q, irr: 0.0 };
                for (i, &j) in modes.iter().enumerate() {
                    acc[(r as usize - 1) * nm + i] += mixer.eval(&[(j, theta), (1, t), (0, zero)]);
                }
            }
            for (c, chi) in chars.iter().enumerate() {
                if let Some(v) = chi.value(k) {
                    let t = Turn { idx: v.over(char_den), den: char_den, irr: 0.0 };
                    for (i, &j) in modes.iter().enumerate() {
                        acc[(q_usize + c) * nm + i] += mixer.eval(&[(j, theta), (0, zero), (1, t)]);
                    }
                }
            }
        },
        add_vec,
    );
    let mean = f.integral();
    let progressions = (0..q_usize)
        .map(|r| residual(f, &modes, &prog[r * nm..(r + 1) * nm], n, mean))
        .fold(0.0, f64::max);
    let twisted_max = (1..=q_usize)
        .map(|r| {
            let target = if r == q_usize { mean } else { Complex64::new(0.0, 0.0) };
            residual(f, &modes, &twisted[(r - 1) * nm..r * nm], n, target)
        })
        .fold(0.0, f64::max);
    let principal_share = euler_phi(q) as f64 / q as f64;
    let characters = chars
        .iter()
        .enumerate()
        .map(|(c, chi)| {
            let target = if chi.is_principal() { mean * principal_share } else { Complex64::new(0.0, 0.0) };
            residual(f, &modes, &twisted[(q_usize + c) * nm..(q_usize + c + 1) * nm], n, target)
        })
        .fold(0.0, f64::max);
    Ok(AperiodicityQuantities { q, n, progressions, twisted: twisted_max, characters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PrimeSet;
    use crate::phase::UnitPhase;
    use crate::pretend::{distance_partial, partial_mean, FgAddFunction};
    use crate::systems::{AddSystem, ModeSpace};
    use crate::testutil::{big_sieve, mid_sieve, random_fg, rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lam_rot() -> MultSystem {
        MultSystem::rotation(FgMultFunction::liouville(), None).unwrap()
    }

    fn f0() -> FgMultFunction {
        FgMultFunction::liouville_restricted(PrimeSet::explicit(vec![2]).unwrap()).unwrap()
    }

    fn mode1(order: u64) -> ModeFunction {
        ModeFunction::mode(ModeSpace::FiniteCyclic { order }, 1, c(1.0)).unwrap()
    }

    #[test]
    fn koopman_examples() {
        let s = Sieve::new(100).unwrap();
        assert_eq!(koopman_apply(&lam_rot(), &s, 2, &mode1(2)).unwrap().coeff(1), c(-1.0));
        let f = mode1(2);
        assert_eq!(koopman_apply(&lam_rot(), &s, 1, &f).unwrap(), f);
        let sk = MultSystem::skew(AddSystem::new(UnitPhase::rational(1, 2).unwrap(), None).unwrap(), FgAddFunction::big_omega());
        assert_eq!(koopman_apply(&sk, &s, 12, &f).unwrap().coeff(1), c(-1.0));
    }

    #[test]
    fn average_examples() {
        let s = mid_sieve();
        let one = MultSystem::rotation(FgMultFunction::one(), None).unwrap();
        let f = ModeFunction::mode(ModeSpace::FiniteCyclic { order: 1 }, 0, c(1.0)).unwrap();
        let tr = ergodic_average(&one, &f, None, s, &[10, 1000]).unwrap();
        assert!(tr.points.iter().all(|p| p.average == f && p.l2_error == 0.0));
        let tr = ergodic_average(&lam_rot(), &mode1(2), None, s, &[1_000_000]).unwrap();
        let oracle = partial_mean(&FgMultFunction::liouville(), s, 1_000_000).unwrap();
        assert!((tr.points[0].average.coeff(1) - oracle).norm() < 1e-12);
        assert!(oracle.norm() <= 1e-2);
        let rot = MultSystem::rotation(f0(), None).unwrap();
        let tr = ergodic_average(&rot, &mode1(2), None, s, &[1_000_000]).unwrap();
        assert!((tr.predicted.coeff(1) - c(1.0 / 3.0)).norm() < 1e-15);
        assert!(tr.points[0].l2_error < 0.02);
    }

    #[test]
    fn predicted_examples() {
        let one = MultSystem::rotation(FgMultFunction::one(), None).unwrap();
        let f = ModeFunction::mode(ModeSpace::FiniteCyclic { order: 1 }, 0, Complex64::new(0.3, 0.4)).unwrap();
        assert_eq!(predicted_limit(&one, &f, None).unwrap(), f);
        let rot = MultSystem::rotation(f0(), None).unwrap();
        assert!((predicted_limit(&rot, &mode1(2), None).unwrap().coeff(1) - c(1.0 / 3.0)).norm() < 1e-15);
        assert_eq!(predicted_limit(&lam_rot(), &mode1(2), None).unwrap().coeff(1), c(0.0));
        // weighting by the generator itself keeps mode 1 intact
        assert_eq!(predicted_limit(&rot, &mode1(2), Some(&f0())).unwrap().coeff(1), c(1.0));
    }

    #[test]
    fn weighted_average_converges_to_prediction() {
        let s = big_sieve();
        // S = rotation by χ* mod 3 on ℤ/2, weighted by χ*: mode 1 pretends the weight exactly
        let chi = crate::characters::characters_mod(3).unwrap()[1].modified();
        let rot = MultSystem::rotation(chi.clone(), None).unwrap();
        let f = ModeFunction::new(ModeSpace::FiniteCyclic { order: 2 }, [(1, c(1.0))].into()).unwrap();
        let tr = ergodic_average(&rot, &f, Some(&chi), s, &[10_000_000]).unwrap();
        assert_eq!(tr.predicted.coeff(1), c(1.0));
        assert!(tr.points[0].l2_error <= 0.05);
        // weight f0 against λ: g_1 = λ is far from f0, so the limit vanishes
        let tr = ergodic_average(&lam_rot(), &mode1(2), Some(&f0()), s, &[10_000_000]).unwrap();
        assert_eq!(tr.predicted.coeff(1), c(0.0));
        assert!(tr.points[0].l2_error <= 0.05);
    }

    #[test]
    fn distance_system_examples() {
        let s = mid_sieve();
        let d = distance_system(&lam_rot(), &mode1(2), &FgMultFunction::one(), s, 10).unwrap();
        let oracle = distance_partial(&FgMultFunction::liouville(), &FgMultFunction::one(), s, 10).unwrap();
        assert!((d - oracle).abs() < 1e-12);
        assert_eq!(distance_system(&lam_rot(), &mode1(2), &FgMultFunction::liouville(), s, 1000).unwrap(), 0.0);
        assert!(distance_system(&lam_rot(), &ModeFunction::zero(ModeSpace::FiniteCyclic { order: 2 }), &FgMultFunction::one(), s, 10).is_err());
    }

    #[test]
    fn wm_examples() {
        let s = mid_sieve();
        let f = ModeFunction::mode(ModeSpace::FiniteCyclic { order: 2 }, 0, c(2.0)).unwrap();
        assert_eq!(wm_average(&lam_rot(), &f, s, 1000).unwrap(), 0.0);
        assert!((wm_average(&lam_rot(), &mode1(2), s, 1000).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_along_schedule() {
        let s = big_sieve();
        let systems = [lam_rot(), MultSystem::rotation(f0(), None).unwrap()];
        for sys in &systems {
            let f = ModeFunction::new(ModeSpace::FiniteCyclic { order: 2 }, [(0, c(0.5)), (1, Complex64::new(0.2, -0.7))].into()).unwrap();
            let tr = ergodic_average(sys, &f, None, s, &[10_000, 20_000, 100_000, 200_000, 1_000_000, 2_000_000]).unwrap();
            let gaps: Vec<f64> = tr.points.chunks(2).map(|w| w[0].average.l2_distance(&w[1].average)).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        }
    }

    #[test]
    fn aperiodicity_for_liouville_rotation() {
        let s = big_sieve();
        let f = ModeFunction::new(ModeSpace::FiniteCyclic { order: 2 }, [(0, c(1.0)), (1, c(1.0))].into()).unwrap();
        for q in [2, 3, 4] {
            let a = aperiodicity_quantities(&lam_rot(), &f, q, s, 1_000_000).unwrap();
            assert!(a.progressions < 0.1 && a.twisted < 0.1 && a.characters < 0.1, "{a:?}");
        }
        // a periodic system fails the character criterion
        let chi = crate::characters::characters_mod(3).unwrap()[1].modified();
        let rot = MultSystem::rotation(chi, None).unwrap();
        let a = aperiodicity_quantities(&rot, &mode1(2), 3, s, 100_000).unwrap();
        assert!(a.characters > 0.3, "{a:?}");
    }

    fn random_system(r: &mut impl Rng) -> MultSystem {
        if r.gen_bool(0.7) {
            let g = random_fg(r);
            let band = (!g.is_rational()).then(|| r.gen_range(1..4));
            MultSystem::rotation(g, band).unwrap()
        } else {
            let angle = crate::testutil::random_phase(r);
            let base = AddSystem::new(angle, Some(r.gen_range(1..4))).unwrap();
            MultSystem::skew(base, FgAddFunction::big_omega())
        }
    }

    fn random_mode_function(space: ModeSpace, r: &mut impl Rng) -> ModeFunction {
        let mut coeffs = std::collections::BTreeMap::new();
        for j in space.modes() {
            if r.gen_bool(0.6) {
                coeffs.insert(j, Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            }
        }
        ModeFunction::new(space, coeffs).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn koopman_is_unitary(seed in any::<u64>(), n in 1u64..10_000) {
            let mut r = rng(seed);
            let sys = random_system(&mut r);
            let f = random_mode_function(sys.space(), &mut r);
            let g = koopman_apply(&sys, mid_sieve(), n, &f).unwrap();
            prop_assert!((g.norm() - f.norm()).abs() <= 1e-12);
        }

        #[test]
        fn spectral_identity(seed in any::<u64>(), n in 2u64..100_000) {
            let mut r = rng(seed);
            let sys = random_system(&mut r);
            let f = random_mode_function(sys.space(), &mut r);
            prop_assume!(f.norm_sq() > 0.0);
            let w = random_fg(&mut r);
            let s = mid_sieve();
            let lhs = distance_system(&sys, &f, &w, s, n).unwrap().powi(2);
            let rhs: f64 = f.coeffs().iter()
                .map(|(&j, c)| c.norm_sqr() * distance_partial(&sys.multiplier(j), &w, s, n).unwrap().powi(2))
                .sum();
            prop_assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
        }
    }
}
