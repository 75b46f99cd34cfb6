//! Dirichlet characters as exact value tables.
//!
//! Characters mod `q` are built from the CRT decomposition of `(ℤ/qℤ)^×`:
//! a cyclic factor per odd prime power (generated by its smallest primitive
//! root), `{±1}` for `4`, and `{±1} × ⟨5⟩` for `2^k`, `k ≥ 3`. A character is
//! then a tuple of exponents, one per cyclic factor, and its values are
//! stored as reduced rational phases.

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factor_small, PrimeSet};
use crate::cyclotomic::CyclotomicSum;
use crate::error::{ensure, Error, Result};
use crate::phase::{turn_to_complex, Ratio01, UnitPhase};
use crate::pretend::FgMultFunction;

/// Largest modulus `characters_mod` accepts by default.
pub const DEFAULT_MODULUS_BOUND: u64 = 10_000;

/// A Dirichlet character: `values[n mod q]` is `χ(n)`, `None` where `(n, q) > 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCharacter", into = "RawCharacter")]
pub struct DirichletCharacter {
    modulus: u64,
    values: Vec<Option<Ratio01>>,
}

/// Wire form: `values` lists residues `1, 2, …, q` in that order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCharacter {
    modulus: u64,
    values: Vec<Option<Ratio01>>,
}

impl TryFrom<RawCharacter> for DirichletCharacter {
    type Error = Error;
    fn try_from(raw: RawCharacter) -> Result<Self> {
        let q = raw.modulus;
        ensure!(q >= 1, Validation, "character modulus must be positive");
        ensure!(
            raw.values.len() as u64 == q,
            Validation,
            "character mod {q} needs {q} values, got {}",
            raw.values.len()
        );
        let mut values = raw.values;
        values.rotate_right(1);
        DirichletCharacter::from_table(q, values)
    }
}

impl From<DirichletCharacter> for RawCharacter {
    fn from(chi: DirichletCharacter) -> Self {
        let mut values = chi.values;
        values.rotate_left(1);
        RawCharacter { modulus: chi.modulus, values }
    }
}

/// One cyclic factor of `(ℤ/qℤ)^×`.
#[derive(Debug, Clone)]
struct CyclicFactor {
    prime_power: u64,
    order: u64,
    /// generator lifted to a residue mod q (≡ 1 on the other prime powers)
    generator: u64,
    /// discrete log on residues mod `prime_power`; `u64::MAX` off the units
    log: Vec<u64>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// `x ≡ a (mod m)`, `x ≡ 1 (mod q/m)` for coprime `m`, `q/m`.
fn lift(a: u64, m: u64, q: u64) -> u64 {
    let rest = q / m;
    (0..m).map(|t| 1 + rest * t).find(|x| x % m == a % m).unwrap() % q
}

fn smallest_primitive_root(pp: u64, p: u64) -> u64 {
    let phi = euler_phi(pp);
    let ell: Vec<u64> = factor_small(phi).into_iter().map(|(l, _)| l).collect();
    (2..pp)
        .find(|&g| g % p != 0 && ell.iter().all(|&l| pow_mod(g, phi / l, pp) != 1))
        .expect("odd prime powers are cyclic")
}

fn cyclic_log(g: u64, order: u64, pp: u64) -> Vec<u64> {
    let mut log = vec![u64::MAX; pp as usize];
    let mut x = 1 % pp;
    for k in 0..order {
        log[x as usize] = k;
        x = x * g % pp;
    }
    log
}

fn unit_group(q: u64) -> Vec<CyclicFactor> {
    let mut out = Vec::new();
    for (p, e) in factor_small(q) {
        let pp = p.pow(e);
        if p == 2 {
            if e == 2 {
                out.push(CyclicFactor {
                    prime_power: 4,
                    order: 2,
                    generator: lift(3, 4, q),
                    log: vec![u64::MAX, 0, u64::MAX, 1],
                });
            } else if e >= 3 {
                let half = pp / 4;
                let mut sign = vec![u64::MAX; pp as usize];
                let mut five = vec![u64::MAX; pp as usize];
                let mut x = 1u64;
                for t in 0..half {
                    sign[x as usize] = 0;
                    five[x as usize] = t;
                    sign[(pp - x) as usize] = 1;
                    five[(pp - x) as usize] = t;
                    x = x * 5 % pp;
                }
                out.push(CyclicFactor { prime_power: pp, order: 2, generator: lift(pp - 1, pp, q), log: sign });
                out.push(CyclicFactor { prime_power: pp, order: half, generator: lift(5, pp, q), log: five });
            }
        } else {
            let order = pp - pp / p;
            let g = smallest_primitive_root(pp, p);
            out.push(CyclicFactor { prime_power: pp, order, generator: lift(g, pp, q), log: cyclic_log(g, order, pp) });
        }
    }
    out
}

/// All `φ(q)` characters mod `q`, principal first, in lexicographic order of
/// their exponent tuples.
pub fn characters_mod(q: u64) -> Result<Vec<DirichletCharacter>> {
    characters_mod_bounded(q, DEFAULT_MODULUS_BOUND)
}

pub fn characters_mod_bounded(q: u64, bound: u64) -> Result<Vec<DirichletCharacter>> {
    ensure!(q >= 1, Domain, "character modulus must be positive");
    ensure!(q <= bound, Resource, "modulus {q} exceeds the character bound {bound}");
    let factors = unit_group(q);
    let mut exps = vec![0u64; factors.len()];
    let mut out = Vec::with_capacity(euler_phi(q) as usize);
    loop {
        let values = (0..q)
            .map(|n| {
                if n.gcd(&q) != 1 {
                    return None;
                }
                let mut acc = Ratio01::ZERO;
                for (f, &k) in factors.iter().zip(&exps) {
                    let l = f.log[(n % f.prime_power) as usize];
                    acc = acc.add(Ratio01::new(((k * l) % f.order) as i64, f.order).unwrap());
                }
                Some(acc)
            })
            .collect();
        out.push(DirichletCharacter { modulus: q, values });
        // odometer over exponent tuples, last factor fastest
        let mut i = factors.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < factors[i].order {
                break;
            }
            exps[i] = 0;
        }
    }
}

impl DirichletCharacter {
    /// Validates a value table indexed by residue `n mod q`.
    pub fn from_table(q: u64, values: Vec<Option<Ratio01>>) -> Result<Self> {
        ensure!(values.len() as u64 == q, Validation, "table length must equal the modulus");
        for (n, v) in values.iter().enumerate() {
            let unit = (n as u64).gcd(&q) == 1;
            ensure!(
                unit == v.is_some(),
                Validation,
                "character mod {q} must vanish exactly off the units (residue {n})"
            );
        }
        ensure!(values[(1 % q) as usize] == Some(Ratio01::ZERO), Validation, "χ(1) must be 1");
        let chi = DirichletCharacter { modulus: q, values };
        for f in unit_group(q) {
            let g = f.generator;
            let chig = chi.value(g).unwrap();
            ensure!(
                chig.scale(f.order as i64) == Ratio01::ZERO,
                Validation,
                "χ({g}) is not a root of unity of the right order"
            );
            for a in 0..q {
                if let Some(ca) = chi.value(a) {
                    ensure!(
                        chi.value(g * a) == Some(chig.add(ca)),
                        Validation,
                        "table mod {q} is not multiplicative at ({g}, {a})"
                    );
                }
            }
        }
        Ok(chi)
    }

    pub fn principal(q: u64) -> Self {
        let values = (0..q).map(|n| (n.gcd(&q) == 1).then_some(Ratio01::ZERO)).collect();
        DirichletCharacter { modulus: q, values }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `χ(n)` as a phase, `None` when `(n, q) > 1`.
    pub fn value(&self, n: u64) -> Option<Ratio01> {
        self.values[(n % self.modulus) as usize]
    }

    pub fn value_complex(&self, n: u64) -> Complex64 {
        self.value(n).map_or(Complex64::new(0.0, 0.0), Ratio01::to_complex)
    }

    pub fn is_principal(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_zero())
    }

    /// Lcm of the value denominators.
    pub fn order(&self) -> u64 {
        self.values.iter().flatten().fold(1, |acc, v| acc.lcm(&v.den()))
    }

    pub fn conj(&self) -> Self {
        DirichletCharacter {
            modulus: self.modulus,
            values: self.values.iter().map(|v| v.map(Ratio01::neg)).collect(),
        }
    }

    /// Smallest `d | q` such that `χ` is trivial on units `≡ 1 (mod d)`.
    pub fn conductor(&self) -> u64 {
        let q = self.modulus;
        (1..=q)
            .filter(|d| q % d == 0)
            .find(|&d| {
                (1..=q)
                    .step_by(d as usize)
                    .all(|a| self.value(a).map_or(true, |v| v.is_zero()))
            })
            .unwrap_or(q)
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// The primitive character mod the conductor that induces `self`.
    pub fn primitive_inducing(&self) -> Self {
        let d = self.conductor();
        let q = self.modulus;
        let values = (0..d)
            .map(|b| {
                if b.gcd(&d) != 1 {
                    return None;
                }
                (0..q / d).map(|k| b + k * d).find_map(|a| self.value(a))
            })
            .collect();
        DirichletCharacter { modulus: d, values }
    }

    /// `τ(χ) = Σ_{m=1}^{q} e(m/q) χ(m)`.
    pub fn gauss_sum(&self) -> Complex64 {
        let q = self.modulus;
        (1..=q)
            .filter_map(|m| self.value(m).map(|v| v.add(Ratio01::new(m as i64, q).unwrap()).to_complex()))
            .sum()
    }

    /// `χ*`: `χ` on primes not dividing `q`, phase 1 on the primes dividing `q`.
    pub fn modified(&self) -> FgMultFunction {
        let q = self.modulus;
        if q == 1 {
            return FgMultFunction::one();
        }
        let mut groups: Vec<(Ratio01, Vec<u64>)> = Vec::new();
        for r in 1..q {
            if let Some(v) = self.value(r) {
                match groups.iter_mut().find(|(g, _)| *g == v) {
                    Some((_, rs)) => rs.push(r),
                    None => groups.push((v, vec![r])),
                }
            }
        }
        let mut classes: Vec<(PrimeSet, UnitPhase)> = groups
            .into_iter()
            .map(|(v, rs)| (PrimeSet::residue(q, rs).unwrap(), UnitPhase::Rational(v)))
            .collect();
        let ps = factor_small(q).into_iter().map(|(p, _)| p).collect();
        classes.push((PrimeSet::explicit(ps).unwrap(), UnitPhase::ONE));
        FgMultFunction::new(classes).expect("residue classes mod q plus its primes partition ℙ")
    }

    /// `|χ(n) − τ(χ̄)^{-1} Σ_m χ̄(m) e(mn/q)|`; requires a primitive character.
    pub fn fourier_residual(&self, n: u64) -> Result<f64> {
        ensure!(self.is_primitive(), Precondition, "the Fourier expansion needs a primitive character");
        let q = self.modulus;
        let bar = self.conj();
        let sum: Complex64 = (1..=q)
            .filter_map(|m| {
                let mn = (m as u128 * n as u128 % q as u128) as i64;
                bar.value(m).map(|v| v.add(Ratio01::new(mn, q).unwrap()).to_complex())
            })
            .sum();
        Ok((self.value_complex(n) - sum / bar.gauss_sum()).norm())
    }

    /// Limit of `(1/N) Σ_{n≤N} e(rn/q) χ(n)`, averaged over one full period `lcm(q, q₀)`.
    pub fn twisted_mean_limit(&self, r: u64, q: u64) -> Result<Complex64> {
        ensure!(q >= 1, Domain, "twist modulus must be positive");
        ensure!(r.gcd(&q) == 1, Precondition, "twist needs (r, q) = 1, got r={r}, q={q}");
        ensure!(self.is_primitive(), Precondition, "twisted mean limit needs a primitive character");
        let period = q.lcm(&self.modulus);
        Ok(self.twisted_sum(r, q, period) / period as f64)
    }

    /// `(1/N) Σ_{n≤N} e(rn/q) χ(n)` by direct summation.
    pub fn partial_mean_twisted(&self, r: u64, q: u64, n: u64) -> Complex64 {
        self.twisted_sum(r, q, n) / n as f64
    }

    fn twisted_sum(&self, r: u64, q: u64, n: u64) -> Complex64 {
        let den = q.lcm(&self.order());
        let roots: Vec<Complex64> = (0..den).map(|k| turn_to_complex(k, den)).collect();
        let step = den / q;
        (1..=n)
            .filter_map(|k| {
                let rk = (r as u128 * k as u128 % q as u128) as u64;
                self.value(k).map(|v| roots[((rk * step + v.over(den)) % den) as usize])
            })
            .sum()
    }
}

/// Exact check of `(1/φ(q)) Σ_χ χ̄(r) χ(n) = 1_{n ≡ r (q)}` over all `n` and units `r`.
/// Returns the number of `(n, r)` pairs checked; fails on the first mismatch.
pub fn verify_orthogonality(q: u64) -> Result<usize> {
    let chars = characters_mod(q)?;
    let order = chars.iter().fold(1, |acc, c| acc.lcm(&c.order()));
    let phi = euler_phi(q) as i64;
    let mut checked = 0;
    for r in (0..q).filter(|r| r.gcd(&q) == 1) {
        for n in 0..q {
            let mut sum = CyclotomicSum::zero(order);
            for chi in &chars {
                if let (Some(a), Some(b)) = (chi.value(n), chi.value(r)) {
                    sum.add_root(a.add(b.neg()).over(order), 1);
                }
            }
            let expect = if n == r { phi } else { 0 };
            ensure!(
                sum.as_integer() == Some(expect),
                Validation,
                "orthogonality fails mod {q} at n={n}, r={r}"
            );
            checked += 1;
        }
    }
    Ok(checked)
}

/// Exact check of `(1/q) Σ_{a=1}^{q} e(a(n−r)/q) = 1_{n ≡ r (q)}` over all residue pairs.
pub fn verify_geometric_indicator(q: u64) -> Result<usize> {
    let mut checked = 0;
    for r in 0..q {
        for n in 0..q {
            let mut sum = CyclotomicSum::zero(q);
            let diff = (n + q - r) % q;
            for a in 1..=q {
                sum.add_root(a * diff % q, 1);
            }
            let expect = if n == r { q as i64 } else { 0 };
            ensure!(
                sum.as_integer() == Some(expect),
                Validation,
                "geometric indicator fails mod {q} at n={n}, r={r}"
            );
            checked += 1;
        }
    }
    Ok(checked)
}
