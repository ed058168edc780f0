//! The cubic Picard term `A₃[φ](t) = ∫₀^t U(t−τ)(V[|U(τ)φ|²]U(τ)φ) dτ`,
//! with `U(t) = e^{itφ_m(D)}` (mass-shifted gauge).
//!
//! For `i∂ₜu = −φ_m(D)u − Vu` the solution with data `εφ` expands as
//! `u = εU(t)φ + iε³A₃[φ](t) + O(ε⁵)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Gauge;
use super::medium::{dealias_mask, Medium};
use super::propagate::linear_frequency;
use crate::error::{LabError, Result};
use crate::par::sum_by;
use crate::quad::{gauss_legendre, simpson_weights};
use crate::spectral::{Field, Grid3, MultiplierSymbol};

/// How `|x|⁻¹∗` is realized on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombKernel {
    /// `4π/|ξ|²` on the torus, zero mode dropped; optional 2/3-rule on the density.
    Torus { dealias: bool },
    /// Lattice sums read as midpoint quadrature of the free-space frequency
    /// convolution: `4π/|ζ|²` is replaced by its cell average near `ζ = 0`.
    FreeSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelOptions {
    /// The field is the envelope `w` of `e^{ic·x}w`; symbols are evaluated at `c + η`.
    pub carrier: [f64; 3],
    pub kernel: CoulombKernel,
}

impl Default for DuhamelOptions {
    fn default() -> Self {
        DuhamelOptions {
            carrier: [0.0; 3],
            kernel: CoulombKernel::Torus { dealias: true },
        }
    }
}

#[derive(Debug, Clone)]
pub struct DuhamelResult {
    /// `A₃[φ](t)` in spectral form (envelope coordinates when a carrier is set).
    pub field: Field,
    /// `‖S_n − S_{n/2}‖/‖S_n‖`.
    pub relative_change: f64,
    /// `‖S_n − S_{n/2}‖/‖S_{n/2} − S_{n/4}‖`; about 1/16 when Simpson is in its asymptotic regime.
    pub refinement_ratio: f64,
    /// Set when the refinement ratio exceeds 0.1.
    pub not_converged: bool,
}

/// `∫_{[-½,½]³} |u|⁻² du = 3∫∫_{[-½,½]²} (¼+y²+z²)⁻¹ dy dz`.
fn origin_cell_integral() -> f64 {
    let gl = gauss_legendre(48, -0.5, 0.5);
    let mut s = 0.0;
    for &(y, wy) in &gl {
        for &(z, wz) in &gl {
            s += wy * wz / (0.25 + y * y + z * z);
        }
    }
    3.0 * s
}

/// Cell average of `|ζ|⁻²` over the unit cell centred at integer `c ≠ 0`.
fn cell_average(c: [i64; 3]) -> f64 {
    let gl = gauss_legendre(10, -0.5, 0.5);
    let mut s = 0.0;
    for &(x, wx) in &gl {
        for &(y, wy) in &gl {
            for &(z, wz) in &gl {
                let a = c[0] as f64 + x;
                let b = c[1] as f64 + y;
                let d = c[2] as f64 + z;
                s += wx * wy * wz / (a * a + b * b + d * d);
            }
        }
    }
    s
}

/// Coulomb multiplier on the lattice for the chosen kernel.
pub fn coulomb_kernel(grid: &Grid3, kernel: CoulombKernel) -> Vec<f64> {
    match kernel {
        CoulombKernel::Torus { dealias } => {
            let mask = if dealias {
                dealias_mask(grid)
            } else {
                (0..grid.len()).map(|i| !grid.on_nyquist(i)).collect()
            };
            (0..grid.len())
                .map(|i| {
                    if mask[i] {
                        MultiplierSymbol::Coulomb.eval(grid.frequency_norm(i))
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        CoulombKernel::FreeSpace => {
            const NEAR: i64 = 3;
            let dk = grid.dk();
            let c0 = origin_cell_integral();
            let mut near = std::collections::HashMap::new();
            for a in -NEAR..=NEAR {
                for b in -NEAR..=NEAR {
                    for c in -NEAR..=NEAR {
                        let v = if (a, b, c) == (0, 0, 0) {
                            c0
                        } else {
                            cell_average([a, b, c])
                        };
                        near.insert((a, b, c), v);
                    }
                }
            }
            (0..grid.len())
                .map(|i| {
                    let (x, y, z) = grid.unravel(i);
                    let key = (grid.signed_index(x), grid.signed_index(y), grid.signed_index(z));
                    match near.get(&key) {
                        Some(avg) => 4.0 * PI * avg / (dk * dk),
                        None => MultiplierSymbol::Coulomb.eval(grid.frequency_norm(i)),
                    }
                })
                .collect()
        }
    }
}

pub fn duhamel_third_iterate(phi: &Field, t: f64, m: f64, n_quad: usize) -> Result<DuhamelResult> {
    duhamel_third_iterate_with(phi, t, m, n_quad, &DuhamelOptions::default())
}

pub fn duhamel_third_iterate_with(
    phi: &Field,
    t: f64,
    m: f64,
    n_quad: usize,
    opts: &DuhamelOptions,
) -> Result<DuhamelResult> {
    if n_quad < 4 || n_quad % 2 != 0 {
        return Err(LabError::InvalidParameter(format!(
            "n_quad must be even and >= 4, got {n_quad}"
        )));
    }
    if !(t.is_finite() && m.is_finite() && m >= 0.0) {
        return Err(LabError::InvalidParameter("t must be finite and m >= 0".into()));
    }
    let g = *phi.grid();
    let c = opts.carrier;
    let omega: Vec<f64> = (0..g.len())
        .map(|i| {
            let k = g.frequency(i);
            let v = [c[0] + k[0], c[1] + k[1], c[2] + k[2]];
            linear_frequency((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt(), m, Gauge::MassShifted)
        })
        .collect();
    let kernel = coulomb_kernel(&g, opts.kernel);
    let phi_hat = phi.to_spectral().into_values();

    // integrand e^{i(t−τ)ω} N̂(τ) at τ_j = j t/n, folded into Simpson sums
    // with n, n/2 and n/4 intervals as the nodes are produced
    let h = t / n_quad as f64;
    let levels: Vec<usize> = [1usize, 2, 4]
        .into_iter()
        .filter(|s| n_quad % (2 * s) == 0)
        .collect();
    let weights: Vec<Vec<f64>> = levels
        .iter()
        .map(|&s| simpson_weights(n_quad / s, h * s as f64))
        .collect();
    let mut sums = vec![vec![Complex64::default(); g.len()]; levels.len()];
    for j in 0..=n_quad {
        let tau = j as f64 * h;
        let mut buf: Vec<Complex64> = phi_hat
            .par_iter()
            .zip(omega.par_iter())
            .map(|(v, w)| v * Complex64::from_polar(1.0, tau * w))
            .collect();
        phi.to_physical_buf(&mut buf);
        let v = phi.potential(&buf, &kernel);
        buf.par_iter_mut().zip(v.par_iter()).for_each(|(b, v)| *b *= v);
        phi.to_spectral_buf(&mut buf);
        buf.par_iter_mut()
            .zip(omega.par_iter())
            .for_each(|(b, w)| *b *= Complex64::from_polar(1.0, (t - tau) * w));
        for ((acc, w), &s) in sums.iter_mut().zip(&weights).zip(&levels) {
            if j % s == 0 {
                let wj = w[j / s];
                acc.par_iter_mut().zip(buf.par_iter()).for_each(|(a, b)| *a += b * wj);
            }
        }
    }

    let norm = |v: &[Complex64]| sum_by(v.len(), |i| v[i].norm_sqr()).sqrt();
    let diff = |a: &[Complex64], b: &[Complex64]| {
        sum_by(a.len(), |i| (a[i] - b[i]).norm_sqr()).sqrt()
    };

    let total = norm(&sums[0]);
    let (mut relative_change, mut refinement_ratio) = (0.0, 0.0);
    if sums.len() >= 2 {
        let d1 = diff(&sums[0], &sums[1]);
        relative_change = if total > 0.0 { d1 / total } else { 0.0 };
        if sums.len() == 3 {
            let d2 = diff(&sums[1], &sums[2]);
            // differences at round-off level carry no convergence information
            refinement_ratio = if d2 > 1e-13 * total.max(f64::MIN_POSITIVE) {
                d1 / d2
            } else {
                0.0
            };
        }
    }
    let full = sums.swap_remove(0);
    let field = phi.with_spectral(full);
    Ok(DuhamelResult {
        field,
        relative_change,
        refinement_ratio,
        not_converged: refinement_ratio > 0.1,
    })
}
