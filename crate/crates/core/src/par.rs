//! Float reductions whose rounding does not depend on the worker count.
//! Rayon's adaptive splitting regroups `sum()` with the schedule, which
//! breaks bitwise reproducibility across runs.

use std::ops::Add;

use rayon::prelude::*;

const CHUNK: usize = 4096;

/// `Σ f(i)` over `0..n`: fixed chunks summed sequentially, then combined in
/// chunk order.
pub(crate) fn sum_by<T, F>(n: usize, f: F) -> T
where
    T: Copy + Send + Default + Add<Output = T>,
    F: Fn(usize) -> T + Sync,
{
    let parts: Vec<T> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).fold(T::default(), |a, i| a + f(i)))
        .collect();
    parts.into_iter().fold(T::default(), |a, b| a + b)
}
