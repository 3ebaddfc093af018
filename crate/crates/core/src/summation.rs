//! Deterministic pairwise (cascade) summation.
//!
//! The tree shape depends only on the number of terms, so results are
//! bit-reproducible whatever the evaluation schedule. Error growth is
//! `O(ε log n)` instead of the `O(ε n)` of a running sum.

const LEAF: usize = 32;

/// Pairwise sum of `term(0) + … + term(len − 1)`, component-wise.
pub fn pairwise_sum<const N: usize>(len: usize, term: impl Fn(usize) -> [f64; N]) -> [f64; N] {
    sum_range(0, len, &term)
}

fn sum_range<const N: usize>(start: usize, end: usize, term: &impl Fn(usize) -> [f64; N]) -> [f64; N] {
    if end - start <= LEAF {
        let mut acc = [0.0; N];
        for i in start..end {
            let t = term(i);
            for (a, v) in acc.iter_mut().zip(t) {
                *a += v;
            }
        }
        return acc;
    }
    let mid = start + (end - start) / 2;
    let left = sum_range(start, mid, term);
    let right = sum_range(mid, end, term);
    let mut out = left;
    for (o, r) in out.iter_mut().zip(right) {
        *o += r;
    }
    out
}

/// Pairwise sum of a slice of vectors.
pub fn pairwise_sum_slice<const N: usize>(values: &[[f64; N]]) -> [f64; N] {
    pairwise_sum(values.len(), |i| values[i])
}
