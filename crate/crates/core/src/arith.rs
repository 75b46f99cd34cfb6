//! Integer arithmetic: sieve tables, factorization, prime sets and the
//! prime-factor counting functions built on them.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Largest sieve built unless a caller raises the budget explicitly.
pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;

/// Smallest-prime-factor table up to `limit`, built by a linear sieve.
///
/// Immutable after construction; share it freely between threads.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Sieve {
    /// Sieve up to `limit` under [`DEFAULT_SIEVE_LIMIT`].
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_budget(limit, DEFAULT_SIEVE_LIMIT)
    }

    pub fn with_budget(limit: u64, budget: u64) -> Result<Self> {
        ensure!(limit >= 2, Precondition, "sieve limit must be at least 2, got {limit}");
        ensure!(
            limit <= budget && limit < u32::MAX as u64,
            Resource,
            "sieve limit {limit} exceeds the configured budget {budget}"
        );
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::with_capacity(estimate_pi(limit));
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(Sieve { spf, primes })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `≤ n` (a prefix of [`Sieve::primes`]).
    pub fn primes_up_to(&self, n: u64) -> &[u32] {
        let k = self.primes.partition_point(|&p| (p as u64) <= n);
        &self.primes[..k]
    }

    /// Fails with a resource error when `n` is beyond the table.
    pub fn check_covers(&self, n: u64) -> Result<()> {
        ensure!(
            n <= self.limit(),
            Resource,
            "sieve covers [1, {}] but {n} was requested",
            self.limit()
        );
        Ok(())
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    /// Prime factors of `n` with multiplicity, as `(p, e)` in increasing order.
    ///
    /// Panics if `n` is 0 or beyond the sieve; see [`Sieve::factorize`] for the checked form.
    pub fn factors(&self, n: u64) -> PrimePowers<'_> {
        assert!(n >= 1, "factors(0) is undefined");
        assert!(n <= self.limit(), "{n} beyond sieve limit {}", self.limit());
        PrimePowers { spf: &self.spf, rest: n as usize }
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        ensure!(n >= 1, Domain, "cannot factorize 0");
        self.check_covers(n)?;
        Ok(Factorization { n, factors: self.factors(n).collect() })
    }

    pub fn big_omega(&self, n: u64) -> u32 {
        self.factors(n).map(|(_, e)| e).sum()
    }

    pub fn big_omega_restricted(&self, n: u64, set: &PrimeSet) -> u32 {
        self.factors(n).filter(|&(p, _)| set.contains(p)).map(|(_, e)| e).sum()
    }

    pub fn liouville(&self, n: u64) -> i32 {
        parity_sign(self.big_omega(n))
    }

    pub fn liouville_restricted(&self, n: u64, set: &PrimeSet) -> i32 {
        parity_sign(self.big_omega_restricted(n, set))
    }

    pub fn is_p_free(&self, n: u64, set: &PrimeSet) -> bool {
        self.factors(n).all(|(p, _)| !set.contains(p))
    }

    /// `Σ_{p ∈ P, p ≤ n} 1/p`.
    pub fn prime_reciprocal_partial(&self, set: &PrimeSet, n: u64) -> Result<f64> {
        ensure!(n >= 2, Precondition, "prime_reciprocal_partial needs N >= 2");
        self.check_covers(n)?;
        Ok(self
            .primes_up_to(n)
            .iter()
            .filter(|&&p| set.contains(p as u64))
            .map(|&p| 1.0 / p as f64)
            .sum())
    }
}

fn parity_sign(k: u32) -> i32 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn estimate_pi(n: u64) -> usize {
    let x = n as f64;
    if x < 10.0 {
        4
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

pub struct PrimePowers<'a> {
    spf: &'a [u32],
    rest: usize,
}

impl Iterator for PrimePowers<'_> {
    type Item = (u64, u32);

    fn next(&mut self) -> Option<(u64, u32)> {
        if self.rest <= 1 {
            return None;
        }
        let p = self.spf[self.rest] as usize;
        let mut e = 0;
        while self.rest % p == 0 {
            self.rest /= p;
            e += 1;
        }
        Some((p as u64, e))
    }
}

/// Primes up to `limit`, in increasing order.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    Ok(Sieve::new(limit)?.primes().iter().map(|&p| p as u64).collect())
}

/// Canonical factorization: strictly increasing primes with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

/// Trial division factorization for moduli and other small inputs that
/// should not require a sieve.
pub fn factor_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime_small(n: u64) -> bool {
    n >= 2 && factor_small(n) == [(n, 1)]
}

pub fn euler_phi(n: u64) -> u64 {
    factor_small(n).iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

/// A set of primes.
///
/// Explicit sets are the only finite ("few primes") representation; residue
/// classes hold infinitely many primes by Dirichlet's theorem. `Default` is the
/// complement marker inside a function's class list; on its own it means all primes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawPrimeSet", into = "RawPrimeSet")]
pub enum PrimeSet {
    Explicit(Vec<u64>),
    Residue { modulus: u64, residues: Vec<u64> },
    Default,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawPrimeSet {
    Explicit {
        primes: Vec<u64>,
    },
    Residue {
        #[serde(rename = "mod")]
        modulus: u64,
        residues: Vec<u64>,
    },
    Default {},
}

impl TryFrom<RawPrimeSet> for PrimeSet {
    type Error = Error;
    fn try_from(raw: RawPrimeSet) -> Result<Self> {
        match raw {
            RawPrimeSet::Explicit { primes } => PrimeSet::explicit(primes),
            RawPrimeSet::Residue { modulus, residues } => PrimeSet::residue(modulus, residues),
            RawPrimeSet::Default {} => Ok(PrimeSet::Default),
        }
    }
}

impl From<PrimeSet> for RawPrimeSet {
    fn from(s: PrimeSet) -> Self {
        match s {
            PrimeSet::Explicit(primes) => RawPrimeSet::Explicit { primes },
            PrimeSet::Residue { modulus, residues } => RawPrimeSet::Residue { modulus, residues },
            PrimeSet::Default => RawPrimeSet::Default {},
        }
    }
}

impl PrimeSet {
    pub fn explicit(mut primes: Vec<u64>) -> Result<Self> {
        primes.sort_unstable();
        primes.dedup();
        if let Some(&bad) = primes.iter().find(|&&p| !is_prime_small(p)) {
            return Err(Error::Validation(format!("explicit prime set contains non-prime {bad}")));
        }
        Ok(PrimeSet::Explicit(primes))
    }

    /// Primes `p ≡ r (mod m)` for `r` in `residues`; each residue must be reduced and coprime to `m`.
    pub fn residue(modulus: u64, mut residues: Vec<u64>) -> Result<Self> {
        ensure!(modulus >= 1, Validation, "residue modulus must be positive");
        ensure!(!residues.is_empty(), Validation, "residue class list mod {modulus} is empty");
        residues.sort_unstable();
        residues.dedup();
        for &r in &residues {
            ensure!(r < modulus, Validation, "residue {r} not reduced mod {modulus}");
            ensure!(r.gcd(&modulus) == 1, Validation, "residue {r} not coprime to {modulus}");
        }
        Ok(PrimeSet::Residue { modulus, residues })
    }

    /// Membership for a prime `p`.
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSet::Explicit(ps) => ps.binary_search(&p).is_ok(),
            PrimeSet::Residue { modulus, residues } => residues.binary_search(&(p % modulus)).is_ok(),
            PrimeSet::Default => true,
        }
    }

    /// True when the set is an explicit (finite) set.
    pub fn is_few(&self) -> bool {
        matches!(self, PrimeSet::Explicit(_))
    }
}

/// Density `∏_{p∈P}(1 − 1/p)` of the P-free integers, for an explicit finite `P`.
pub fn qp_density(set: &PrimeSet) -> Result<f64> {
    match set {
        PrimeSet::Explicit(ps) => Ok(ps.iter().map(|&p| 1.0 - 1.0 / p as f64).product()),
        _ => Err(Error::Unsupported(
            "density of P-free numbers is 0 when P contains many primes".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_primes(n: u64) -> Vec<u64> {
        (2..=n).filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        let p30 = sieve_primes(30).unwrap();
        assert_eq!(p30, trial_primes(30));
        assert_eq!(p30.len(), 10);
        assert_eq!(*p30.last().unwrap(), 29);
        assert_eq!(sieve_primes(10_000).unwrap(), trial_primes(10_000));
    }

    #[test]
    fn sieve_limits() {
        assert!(matches!(Sieve::new(1), Err(Error::Precondition(_))));
        assert!(matches!(Sieve::with_budget(1000, 100), Err(Error::Resource(_))));
        let s = Sieve::new(100).unwrap();
        assert!(matches!(s.factorize(101), Err(Error::Resource(_))));
    }

    #[test]
    fn factorize_examples() {
        let s = Sieve::new(1000).unwrap();
        assert_eq!(s.factorize(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert!(s.factorize(1).unwrap().factors.is_empty());
        assert_eq!(s.factorize(97).unwrap().factors, vec![(97, 1)]);
        assert!(matches!(s.factorize(0), Err(Error::Domain(_))));
        for n in 1..=1000 {
            let f = s.factorize(n).unwrap();
            assert_eq!(f.product(), n);
            assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(f.factors, factor_small(n));
        }
    }

    #[test]
    fn omega_and_liouville() {
        let s = Sieve::new(1000).unwrap();
        let two = PrimeSet::explicit(vec![2]).unwrap();
        assert_eq!(s.big_omega(12), 3);
        assert_eq!(s.big_omega(1), 0);
        assert_eq!(s.big_omega_restricted(12, &two), 2);
        assert_eq!(s.liouville(12), -1);
        assert_eq!(s.liouville(1), 1);
        assert_eq!(s.liouville_restricted(4, &two), 1);
        for m in 1..=1000u64 {
            for n in 1..=(1000 / m) {
                assert_eq!(s.liouville(m * n), s.liouville(m) * s.liouville(n));
            }
        }
    }

    #[test]
    fn p_free_examples() {
        let s = Sieve::new(100).unwrap();
        let two = PrimeSet::explicit(vec![2]).unwrap();
        assert!(s.is_p_free(15, &two));
        assert!(!s.is_p_free(12, &two));
        assert!(s.is_p_free(1, &PrimeSet::Default));
    }

    #[test]
    fn densities_and_reciprocals() {
        let s = Sieve::new(100).unwrap();
        assert_eq!(qp_density(&PrimeSet::explicit(vec![]).unwrap()).unwrap(), 1.0);
        assert_eq!(qp_density(&PrimeSet::explicit(vec![2]).unwrap()).unwrap(), 0.5);
        let d = qp_density(&PrimeSet::explicit(vec![2, 3]).unwrap()).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(qp_density(&PrimeSet::Default), Err(Error::Unsupported(_))));
        let all = s.prime_reciprocal_partial(&PrimeSet::Default, 10).unwrap();
        assert!((all - (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0)).abs() < 1e-15);
        assert!((all - 1.176190).abs() < 1e-6);
        assert_eq!(s.prime_reciprocal_partial(&PrimeSet::explicit(vec![]).unwrap(), 50).unwrap(), 0.0);
        assert_eq!(s.prime_reciprocal_partial(&PrimeSet::explicit(vec![2]).unwrap(), 10).unwrap(), 0.5);
    }

    #[test]
    fn prime_set_validation() {
        assert!(PrimeSet::explicit(vec![4]).is_err());
        assert!(PrimeSet::residue(4, vec![2]).is_err());
        assert!(PrimeSet::residue(4, vec![5]).is_err());
        assert!(PrimeSet::residue(4, vec![]).is_err());
        let s: PrimeSet = serde_json::from_str(r#"{"type":"residue","mod":4,"residues":[3,1]}"#).unwrap();
        assert_eq!(s, PrimeSet::Residue { modulus: 4, residues: vec![1, 3] });
        assert!(serde_json::from_str::<PrimeSet>(r#"{"type":"default","x":1}"#).is_err());
    }
}
