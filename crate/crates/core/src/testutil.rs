use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{PrimeSet, Sieve};
use crate::phase::UnitPhase;
use crate::pretend::{reduced_residues, FgMultFunction};

pub fn big_sieve() -> &'static Sieve {
    static S: OnceLock<Sieve> = OnceLock::new();
    S.get_or_init(|| Sieve::new(10_000_000).unwrap())
}

pub fn mid_sieve() -> &'static Sieve {
    static S: OnceLock<Sieve> = OnceLock::new();
    S.get_or_init(|| Sieve::new(1_000_000).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_phase(rng: &mut impl Rng) -> UnitPhase {
    if rng.gen_bool(0.15) {
        UnitPhase::irrational(rng.gen_range(0.01..0.99)).unwrap()
    } else {
        let den = rng.gen_range(1..=12u64);
        UnitPhase::rational(rng.gen_range(0..den as i64), den).unwrap()
    }
}

/// Random FG function: a few explicit primes, residue cells mod a small modulus, a default class.
pub fn random_fg(rng: &mut impl Rng) -> FgMultFunction {
    const SMALL: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let m = [1u64, 3, 4, 5, 8, 12][rng.gen_range(0..6)];
    let mut classes = Vec::new();
    let picked: Vec<u64> = SMALL.iter().copied().filter(|_| rng.gen_bool(0.25)).collect();
    if !picked.is_empty() {
        classes.push((PrimeSet::explicit(picked).unwrap(), random_phase(rng)));
    }
    if m > 1 {
        let rs: Vec<u64> = reduced_residues(m).filter(|_| rng.gen_bool(0.5)).collect();
        if !rs.is_empty() {
            classes.push((PrimeSet::residue(m, rs).unwrap(), random_phase(rng)));
        }
    }
    classes.push((PrimeSet::Default, random_phase(rng)));
    FgMultFunction::new(classes).unwrap()
}

/// `f` changed on a random finite set of primes.
pub fn perturb(f: &FgMultFunction, rng: &mut impl Rng) -> FgMultFunction {
    let ps: Vec<u64> = [2u64, 3, 5, 7, 11, 101].iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if ps.is_empty() {
        return f.clone();
    }
    let g = FgMultFunction::on_set(PrimeSet::explicit(ps).unwrap(), random_phase(rng)).unwrap();
    product(f, &g)
}

pub fn product(a: &FgMultFunction, b: &FgMultFunction) -> FgMultFunction {
    a.mul(b).unwrap()
}
