//! Deterministic block-parallel reduction over integer ranges.
//!
//! The range is cut into fixed blocks independent of the thread count; block
//! partials are merged strictly left to right, so results are bit-identical
//! across runs and machines.

use rayon::prelude::*;

pub const BLOCK: u64 = 1 << 14;

/// Folds `step` over `lo..=hi` (empty if `lo > hi`).
pub fn reduce_range<A, I, S, M>(lo: u64, hi: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A,
{
    if lo > hi {
        return init();
    }
    let nblocks = (hi - lo) / BLOCK + 1;
    let partials: Vec<A> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let start = lo + b * BLOCK;
            let end = (start + BLOCK - 1).min(hi);
            let mut acc = init();
            for n in start..=end {
                step(&mut acc, n);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(init(), merge)
}

/// Running totals of `reduce_range` at each point of an increasing schedule.
pub fn reduce_schedule<A, I, S, M>(schedule: &[u64], init: I, step: S, merge: M) -> Vec<A>
where
    A: Send + Clone,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A,
{
    let mut out = Vec::with_capacity(schedule.len());
    let mut total = init();
    let mut prev = 0;
    for &n in schedule {
        let seg = reduce_range(prev + 1, n, &init, &step, &merge);
        total = merge(total, seg);
        out.push(total.clone());
        prev = n;
    }
    out
}

/// Element-wise sum for vector accumulators.
pub fn add_vec<T: Copy + std::ops::AddAssign>(mut a: Vec<T>, b: Vec<T>) -> Vec<T> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_sums_match_closed_form() {
        let s = reduce_range(1, 100_000, || 0u64, |a, n| *a += n, |a, b| a + b);
        assert_eq!(s, 100_000 * 100_001 / 2);
        assert_eq!(reduce_range(5, 4, || 7u64, |a, n| *a += n, |a, b| a + b), 7);
    }

    #[test]
    fn schedule_is_cumulative() {
        let t = reduce_schedule(&[10, 100, 40_000], || 0u64, |a, n| *a += n, |a, b| a + b);
        assert_eq!(t, vec![55, 5050, 40_000 * 40_001 / 2]);
    }

    #[test]
    fn float_reduction_is_reproducible() {
        let f = || reduce_range(1, 300_000, || 0.0f64, |a, n| *a += 1.0 / n as f64, |a, b| a + b);
        assert_eq!(f().to_bits(), f().to_bits());
    }
}
