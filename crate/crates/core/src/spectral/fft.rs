//! Cached FFT plans and a 3D transform built from 1D passes over
//! contiguous rows.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized 1D transform of every contiguous row of length `n`.
pub fn fft_rows(data: &mut [Complex64], n: usize, dir: Direction) {
    let plan = plan(n, dir);
    let rows_per_task = (4096 / n).max(1);
    data.par_chunks_mut(n * rows_per_task).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let (fwd, inv) = plans(n);
    match dir {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    }
}

/// In-place transpose of an `n × n` block.
fn transpose_square(m: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            m.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 3D DFT of an `n³` array stored x-fastest.
///
/// x rows are contiguous; y is handled plane by plane through an in-cache
/// transpose; z by gathering one `(x, z)` slab at a time.
pub fn fft3(data: &mut [Complex64], n: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n * n * n);
    let n2 = n * n;
    fft_rows(data, n, dir);
    data.par_chunks_mut(n2).for_each(|plane| {
        transpose_square(plane, n);
        fft_rows(plane, n, dir);
        transpose_square(plane, n);
    });
    let plan = plan(n, dir);
    let mut slab = vec![Complex64::default(); n2];
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    for y in 0..n {
        for z in 0..n {
            let row = &data[n * y + n2 * z..n * y + n2 * z + n];
            for (x, v) in row.iter().enumerate() {
                slab[x * n + z] = *v;
            }
        }
        plan.process_with_scratch(&mut slab, &mut scratch);
        for z in 0..n {
            let row = &mut data[n * y + n2 * z..n * y + n2 * z + n];
            for (x, v) in row.iter_mut().enumerate() {
                *v = slab[x * n + z];
            }
        }
    }
}

/// Unnormalized 1D DFT along an outer axis: `data` holds `count` blocks of
/// `stride` contiguous values, transformed across the blocks.
pub fn fft_outer(data: &mut [Complex64], count: usize, stride: usize, dir: Direction) {
    debug_assert_eq!(data.len(), count * stride);
    // transpose to (stride, count), transform rows, transpose back
    let mut t = vec![Complex64::default(); data.len()];
    t.par_chunks_mut(count).enumerate().for_each(|(s, dst)| {
        for (c, d) in dst.iter_mut().enumerate() {
            *d = data[c * stride + s];
        }
    });
    fft_rows(&mut t, count, dir);
    data.par_chunks_mut(stride).enumerate().for_each(|(c, dst)| {
        for (s, d) in dst.iter_mut().enumerate() {
            *d = t[s * count + c];
        }
    });
}
