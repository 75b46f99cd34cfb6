//! Joint ergodicity of an additive and a multiplicative action, recurrence
//! averages, and counting of `{m, m+n, m+Ω(n)}` configurations.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::Sieve;
use crate::error::{ensure, Error, Result};
use crate::phase::Ratio01;
use crate::pretend::{FgAddFunction, Turn};
use crate::reduce::{add_vec, reduce_range, reduce_schedule};
use crate::systems::{classify_system, sigma_pr_rat_tilde, sigma_rat, AddSystem, Mixer, ModeFunction, MultSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointVerdict {
    pub jointly_ergodic: bool,
    pub sigma_rat_t: Vec<Ratio01>,
    pub sigma_tilde_s: Vec<Ratio01>,
    pub intersection: Vec<Ratio01>,
}

/// `T` and `S` are jointly ergodic iff `σ_rat(T) ∩ σ̃_pr.rat(S) = {0}`.
pub fn decide_joint(t: &AddSystem, s: &MultSystem) -> Result<JointVerdict> {
    ensure!(t.is_ergodic(), Precondition, "the additive rotation must be ergodic (nonzero angle)");
    ensure!(
        classify_system(s)?.pretentiously_ergodic,
        Precondition,
        "the multiplicative system must be pretentiously ergodic"
    );
    let sigma_rat_t = sigma_rat(t);
    let sigma_tilde_s = sigma_pr_rat_tilde(s)?;
    let right: BTreeSet<Ratio01> = sigma_tilde_s.iter().copied().collect();
    let intersection: Vec<Ratio01> = sigma_rat_t.iter().copied().filter(|x| right.contains(x)).collect();
    Ok(JointVerdict { jointly_ergodic: intersection == [Ratio01::ZERO], sigma_rat_t, sigma_tilde_s, intersection })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPoint {
    pub n: u64,
    /// `‖(1/N) Σ T^n F · S_n G − ∫F ∫G‖₂` in `L²(X × Y)`.
    pub l2_error: f64,
}

/// Joint averages along the schedule; product mode `(j, l)` carries `(1/N) Σ e(jnβ) g_l(n)`.
pub fn joint_average(
    t: &AddSystem,
    s: &MultSystem,
    f: &ModeFunction,
    g: &ModeFunction,
    sieve: &Sieve,
    schedule: &[u64],
) -> Result<Vec<JointPoint>> {
    ensure!(f.space() == t.space(), Precondition, "F must live on the space of T");
    s.check_function(g)?;
    crate::systems::check_schedule(schedule, sieve)?;
    let pairs: Vec<(i64, i64, Complex64)> = f
        .coeffs()
        .iter()
        .flat_map(|(&j, &c)| g.coeffs().iter().map(move |(&l, &d)| (j, l, c * d)))
        .collect();
    let angle = s.angle_kernel();
    let mixer = Mixer::new(&[t.turn_den(), angle.den()]);
    let sums = reduce_schedule(
        schedule,
        || vec![Complex64::new(0.0, 0.0); pairs.len()],
        |acc, n| {
            let tn: Turn = t.turn(n);
            let sn = angle.turn(sieve, n);
            for (slot, &(j, l, _)) in acc.iter_mut().zip(&pairs) {
                *slot += mixer.eval(&[(j, tn), (l, sn)]);
            }
        },
        add_vec,
    );
    let target = f.integral() * g.integral();
    Ok(schedule
        .iter()
        .zip(sums)
        .map(|(&n, sum)| {
            let err: f64 = pairs
                .iter()
                .zip(&sum)
                .map(|(&(j, l, cd), &s)| {
                    let v = cd * s / n as f64;
                    let goal = if j == 0 && l == 0 { target } else { Complex64::new(0.0, 0.0) };
                    (v - goal).norm_sqr()
                })
                .sum();
            JointPoint { n, l2_error: err.sqrt() }
        })
        .collect())
}

/// Largest `k` accepted by `recurrence_average` (the shift table has `k²` entries).
pub const MAX_RECURRENCE_ORDER: u64 = 4096;

/// `(1/N) Σ_{n≤N} μ(A ∩ T₁^{-n} A ∩ T₂^{-a(n)} A)` on `ℤ/kℤ` with uniform `μ`,
/// where `T₁`, `T₂` are rotations by `β₁`, `β₂` whose denominators divide `k`.
pub fn recurrence_average(
    k: u64,
    beta1: Ratio01,
    beta2: Ratio01,
    a: &FgAddFunction,
    set: &[u64],
    sieve: &Sieve,
    n: u64,
) -> Result<f64> {
    ensure!(k >= 1 && k <= MAX_RECURRENCE_ORDER, Resource, "state space order must lie in 1..={MAX_RECURRENCE_ORDER}");
    ensure!(k % beta1.den() == 0 && k % beta2.den() == 0, Precondition, "rotation angles must live on ℤ/{k}ℤ");
    ensure!(!set.is_empty(), Precondition, "the set A must be nonempty");
    ensure!(set.iter().all(|&x| x < k), Precondition, "A must be a subset of 0..{k}");
    ensure!(n >= 1, Domain, "average needs N ≥ 1");
    sieve.check_covers(n)?;
    let ku = k as usize;
    let mut member = vec![false; ku];
    for &x in set {
        member[x as usize] = true;
    }
    let elems: Vec<usize> = (0..ku).filter(|&x| member[x]).collect();
    // table[u][v] = |A ∩ (A − u) ∩ (A − v)|
    let mut table = vec![0u32; ku * ku];
    for u in 0..ku {
        let row: Vec<usize> = elems.iter().copied().filter(|&x| member[(x + u) % ku]).collect();
        for v in 0..ku {
            table[u * ku + v] = row.iter().filter(|&&x| member[(x + v) % ku]).count() as u32;
        }
    }
    let s1 = beta1.num() * (k / beta1.den());
    let s2 = beta2.num() * (k / beta2.den());
    let total: u64 = reduce_range(
        1,
        n,
        || 0u64,
        |acc, m| {
            let u = (s1 as u128 * m as u128 % k as u128) as usize;
            let v = (a.eval(sieve, m) as i128 * s2 as i128).rem_euclid(k as i128) as usize;
            *acc += table[u * ku + v] as u64;
        },
        |x, y| x + y,
    );
    Ok(total as f64 / (n as f64 * k as f64))
}

/// Membership rule of an integer set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetRule {
    /// `n mod modulus ∈ residues`.
    Residues { modulus: u64, residues: Vec<u64> },
    /// The listed members.
    Explicit { members: Vec<u64> },
    /// Bohr set `{n : frac(nα) < width}`.
    Threshold { alpha: f64, width: f64 },
}

/// A subset of `[1, horizon]`; points past the horizon are non-members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIntegerSet", into = "RawIntegerSet")]
pub struct IntegerSetSpec {
    rule: SetRule,
    horizon: u64,
    members: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegerSet {
    rule: SetRule,
    horizon: u64,
}

impl TryFrom<RawIntegerSet> for IntegerSetSpec {
    type Error = Error;
    fn try_from(raw: RawIntegerSet) -> Result<Self> {
        IntegerSetSpec::new(raw.rule, raw.horizon)
    }
}

impl From<IntegerSetSpec> for RawIntegerSet {
    fn from(e: IntegerSetSpec) -> Self {
        RawIntegerSet { rule: e.rule, horizon: e.horizon }
    }
}

/// Largest horizon accepted (one byte per point is materialized).
pub const MAX_HORIZON: u64 = 1 << 30;

impl IntegerSetSpec {
    pub fn new(rule: SetRule, horizon: u64) -> Result<Self> {
        ensure!(horizon <= MAX_HORIZON, Resource, "horizon {horizon} exceeds {MAX_HORIZON}");
        let mut members = vec![false; horizon as usize + 1];
        match &rule {
            SetRule::Residues { modulus, residues } => {
                ensure!(*modulus >= 1, Validation, "residue modulus must be positive");
                ensure!(residues.iter().all(|r| r < modulus), Validation, "residues must lie in 0..{modulus}");
                for n in 1..=horizon {
                    members[n as usize] = residues.contains(&(n % modulus));
                }
            }
            SetRule::Explicit { members: ms } => {
                for &m in ms {
                    ensure!(m >= 1, Validation, "set members must be positive integers");
                    if m <= horizon {
                        members[m as usize] = true;
                    }
                }
            }
            SetRule::Threshold { alpha, width } => {
                ensure!(alpha.is_finite() && width.is_finite(), Validation, "threshold parameters must be finite");
                for n in 1..=horizon {
                    let x = n as f64 * alpha;
                    members[n as usize] = x - x.floor() < *width;
                }
            }
        }
        Ok(IntegerSetSpec { rule, horizon, members })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn rule(&self) -> &SetRule {
        &self.rule
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        n >= 1 && n <= self.horizon && self.members[n as usize]
    }

    /// Upper density estimated as the largest relative count over dyadic
    /// prefixes `[1, 2^i]` between `√horizon` and `horizon`, and the full horizon.
    pub fn upper_density(&self) -> f64 {
        if self.horizon == 0 {
            return 0.0;
        }
        let mut prefix = vec![0u64; self.horizon as usize + 1];
        for n in 1..=self.horizon as usize {
            prefix[n] = prefix[n - 1] + self.members[n] as u64;
        }
        let lo = (self.horizon as f64).sqrt().ceil() as u64;
        let mut best = prefix[self.horizon as usize] as f64 / self.horizon as f64;
        let mut p = 1u64;
        while p <= self.horizon {
            if p >= lo {
                best = best.max(prefix[p as usize] as f64 / p as f64);
            }
            p *= 2;
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigCount {
    pub n: u64,
    pub m: u64,
    pub count: u64,
    pub density: f64,
    pub delta_cubed: f64,
}

/// `|{(n, m) ∈ [1,N]×[1,M] : m, m+n, m+Ω(n) ∈ E}| / (NM)`.
pub fn count_configurations(e: &IntegerSetSpec, sieve: &Sieve, n: u64, m: u64) -> Result<ConfigCount> {
    ensure!(n >= 1 && m >= n, Domain, "need M ≥ N ≥ 1, got N={n}, M={m}");
    sieve.check_covers(n)?;
    let count = reduce_range(
        1,
        n,
        || 0u64,
        |acc, k| {
            let om = sieve.big_omega(k) as u64;
            *acc += (1..=m).filter(|&x| e.contains(x) && e.contains(x + k) && e.contains(x + om)).count() as u64;
        },
        |a, b| a + b,
    );
    Ok(ConfigCount {
        n,
        m,
        count,
        density: count as f64 / (n as f64 * m as f64),
        delta_cubed: e.upper_density().powi(3),
    })
}
