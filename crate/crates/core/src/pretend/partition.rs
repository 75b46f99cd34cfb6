//! Partitions of the primes into finitely many classes.

use std::collections::HashMap;

use num_integer::Integer;

use crate::arith::{factor_small, PrimeSet};
use crate::error::{ensure, Error, Result};

const MAX_REFINEMENT_MODULUS: u64 = 1 << 22;
const NONE: u32 = u32::MAX;

/// Validated class list: explicit sets win over residue classes, residue
/// classes over the trailing default class.
#[derive(Debug, Clone)]
pub(crate) struct Partition {
    specs: Vec<PrimeSet>,
    explicit: HashMap<u64, usize>,
    modulus: u64,
    residue_table: Vec<u32>,
    default: Option<usize>,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.specs == other.specs
    }
}

impl Partition {
    pub(crate) fn new(specs: Vec<PrimeSet>) -> Result<Self> {
        ensure!(!specs.is_empty(), Validation, "a function needs at least one prime class");
        let mut default = None;
        let mut explicit = HashMap::new();
        let mut modulus = 1u64;
        for (i, spec) in specs.iter().enumerate() {
            match spec {
                PrimeSet::Default => {
                    ensure!(
                        i + 1 == specs.len(),
                        Validation,
                        "the default class must be the last entry (found at class {i})"
                    );
                    default = Some(i);
                }
                PrimeSet::Explicit(ps) => {
                    for &p in ps {
                        if let Some(j) = explicit.insert(p, i) {
                            return Err(Error::Validation(format!(
                                "classes {j} and {i} overlap: both contain the prime {p}"
                            )));
                        }
                    }
                }
                PrimeSet::Residue { modulus: m, .. } => {
                    modulus = modulus.lcm(m);
                    ensure!(
                        modulus <= MAX_REFINEMENT_MODULUS,
                        Resource,
                        "common modulus of residue classes exceeds {MAX_REFINEMENT_MODULUS}"
                    );
                }
            }
        }
        for i in 0..specs.len() {
            for j in i + 1..specs.len() {
                if let (
                    PrimeSet::Residue { modulus: m1, residues: r1 },
                    PrimeSet::Residue { modulus: m2, residues: r2 },
                ) = (&specs[i], &specs[j])
                {
                    let g = m1.gcd(m2);
                    if let Some((a, b)) = r1
                        .iter()
                        .flat_map(|a| r2.iter().map(move |b| (*a, *b)))
                        .find(|(a, b)| a % g == b % g)
                    {
                        return Err(Error::Validation(format!(
                            "classes {i} and {j} overlap: {a} mod {m1} and {b} mod {m2} share infinitely many primes"
                        )));
                    }
                }
            }
        }
        let mut residue_table = vec![NONE; modulus as usize];
        for (i, spec) in specs.iter().enumerate() {
            if let PrimeSet::Residue { modulus: m, residues } = spec {
                for (r, slot) in residue_table.iter_mut().enumerate() {
                    if residues.binary_search(&(r as u64 % m)).is_ok() {
                        *slot = i as u32;
                    }
                }
            }
        }
        let part = Partition { specs, explicit, modulus, residue_table, default };
        if part.default.is_none() {
            part.check_coverage()?;
        }
        Ok(part)
    }

    fn check_coverage(&self) -> Result<()> {
        let m = self.modulus;
        ensure!(
            self.specs.iter().any(|s| matches!(s, PrimeSet::Residue { .. })),
            Validation,
            "classes without a default must include residue classes to cover all primes"
        );
        for r in 0..m {
            if r.gcd(&m) == 1 {
                ensure!(
                    self.residue_table[r as usize] != NONE,
                    Validation,
                    "no class covers the primes ≡ {r} mod {m}"
                );
            }
        }
        for (p, _) in factor_small(m) {
            ensure!(
                self.explicit.contains_key(&p) || self.residue_table[(p % m) as usize] != NONE,
                Validation,
                "no class covers the prime {p}"
            );
        }
        Ok(())
    }

    pub(crate) fn specs(&self) -> &[PrimeSet] {
        &self.specs
    }

    pub(crate) fn len(&self) -> usize {
        self.specs.len()
    }

    /// Common modulus of the residue classes (1 if there are none).
    pub(crate) fn modulus(&self) -> u64 {
        self.modulus
    }

    pub(crate) fn class_of_prime(&self, p: u64) -> usize {
        if let Some(&i) = self.explicit.get(&p) {
            return i;
        }
        match self.residue_table[(p % self.modulus) as usize] {
            NONE => self.default.expect("validated partition covers every prime"),
            i => i as usize,
        }
    }

    /// Class holding almost all primes `≡ r (mod m)`, where `self.modulus() | m` and `(r, m) = 1`.
    pub(crate) fn class_of_residue(&self, r: u64) -> usize {
        match self.residue_table[(r % self.modulus) as usize] {
            NONE => self.default.expect("validated partition covers every reduced residue"),
            i => i as usize,
        }
    }

    /// Primes in explicit classes.
    pub(crate) fn explicit_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.explicit.keys().copied()
    }
}

/// Reduced residues modulo `m` (just `0` when `m = 1`).
pub(crate) fn reduced_residues(m: u64) -> impl Iterator<Item = u64> {
    (0..m).filter(move |r| r.gcd(&m) == 1)
}
