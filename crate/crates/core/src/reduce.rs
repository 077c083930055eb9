//! Summation whose result does not depend on the number of worker threads.
//!
//! Items are split into fixed-size chunks, each chunk is summed left to
//! right, and the chunk partials are combined by a fixed pairwise tree.

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

pub fn chunked_sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    chunked_sum_indexed(items.len(), |i| f(&items[i]))
}

/// Sum of `f(0) + ... + f(len - 1)` with a thread-count-independent result.
pub fn chunked_sum_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).sum::<f64>())
        .collect();
    pairwise_sum(&partials)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
