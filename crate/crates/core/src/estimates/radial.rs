//! Radial space-time fields on the sine-transform grid: the radial bilinear
//! probe needs `μ ≪ λ`, out of reach for desk-scale 3D boxes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::xsb::{annulus_coefficients, annulus_profile, bracket, Conjugation};
use crate::error::{LabError, Result};
use crate::illposed::phi_m;
use crate::spectral::fft::{fft_outer, Direction};
use crate::spectral::radial::apply_radial_symbol;
use crate::spectral::{beta1, beta_lambda, RadialGrid, RadialProfile, Representation};

/// `u(t, r)` at `t_j = (j − n_t/2)·t_period/n_t`, physical radial samples
/// stored slice by slice.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSpaceTime {
    grid: RadialGrid,
    n_t: usize,
    t_period: f64,
    values: Vec<Complex64>,
}

impl RadialSpaceTime {
    pub fn new(grid: RadialGrid, n_t: usize, t_period: f64, values: Vec<Complex64>) -> Result<Self> {
        if n_t < 2 || n_t % 2 != 0 {
            return Err(LabError::InvalidGrid(format!("n_t must be even and >= 2, got {n_t}")));
        }
        if !(t_period > 0.0 && t_period.is_finite()) {
            return Err(LabError::InvalidGrid(format!("t_period must be positive, got {t_period}")));
        }
        if values.len() != n_t * grid.n_r() {
            return Err(LabError::InvalidGrid("value count does not match the grid".into()));
        }
        Ok(RadialSpaceTime {
            grid,
            n_t,
            t_period,
            values,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.t_period / self.n_t as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.n_t / 2) as f64) * self.dt()
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.t_period
    }

    pub fn tau(&self, k: usize) -> f64 {
        let k = if k < self.n_t / 2 { k as f64 } else { k as f64 - self.n_t as f64 };
        k * self.dtau()
    }

    pub fn time_nyquist(&self) -> f64 {
        PI / self.dt()
    }

    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.weights();
        let s: f64 = self
            .values
            .chunks(self.grid.n_r())
            .map(|c| c.iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum::<f64>())
            .sum();
        (s * self.dt()).sqrt()
    }

    fn map_slices(&self, f: impl Fn(RadialProfile) -> RadialProfile + Sync) -> RadialSpaceTime {
        let g = self.grid;
        let values = self
            .values
            .par_chunks(g.n_r())
            .flat_map_iter(|c| {
                let p = RadialProfile::from_values(g, c.to_vec(), Representation::Physical).expect("length");
                f(p).to_physical().values().to_vec()
            })
            .collect();
        RadialSpaceTime { values, ..*self }
    }

    pub fn apply_symbol(&self, sym: impl Fn(f64) -> f64 + Sync) -> RadialSpaceTime {
        self.map_slices(|p| apply_radial_symbol(&p, |k| Complex64::new(sym(k), 0.0)))
    }

    pub fn conj(&self) -> RadialSpaceTime {
        RadialSpaceTime {
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..*self
        }
    }

    pub fn mul(&self, other: &RadialSpaceTime) -> Result<RadialSpaceTime> {
        if self.grid != other.grid || self.n_t != other.n_t || self.t_period != other.t_period {
            return Err(LabError::InvalidGrid("radial fields live on different grids".into()));
        }
        Ok(RadialSpaceTime {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            ..*self
        })
    }

    /// Space-time transform, layout `[k·n_r + j]` over `(τ_k, ρ_j)`.
    pub fn spectral(&self) -> Vec<Complex64> {
        let g = self.grid;
        let n = g.n_r();
        let mut data: Vec<Complex64> = self
            .values
            .par_chunks(n)
            .flat_map_iter(|c| {
                RadialProfile::from_values(g, c.to_vec(), Representation::Physical)
                    .expect("length")
                    .to_spectral()
                    .values()
                    .to_vec()
            })
            .collect();
        fft_outer(&mut data, self.n_t, n, Direction::Forward);
        let scale = self.dt() / (2.0 * PI).sqrt();
        for (k, c) in data.chunks_mut(n).enumerate() {
            let f = if k % 2 == 0 { scale } else { -scale };
            c.iter_mut().for_each(|v| *v *= f);
        }
        data
    }

    pub fn xsb_norm(&self, s: f64, b: f64) -> f64 {
        self.xsb_norms(&[s], b)[0]
    }

    /// `‖u‖_{s,b}` for several `s` from one transform.
    pub fn xsb_norms(&self, s: &[f64], b: f64) -> Vec<f64> {
        let g = self.grid;
        let n = g.n_r();
        let w = g.spectral_weights();
        let spec = self.spectral();
        let space: Vec<Vec<f64>> = s
            .iter()
            .map(|&s| (0..n).map(|j| w[j] * bracket(g.k(j)).powf(2.0 * s)).collect())
            .collect();
        let mut acc = vec![0.0; s.len()];
        for (k, c) in spec.chunks(n).enumerate() {
            let tau = self.tau(k);
            for (j, v) in c.iter().enumerate() {
                let t = bracket(tau + g.k(j)).powf(2.0 * b) * v.norm_sqr();
                for (a, sw) in acc.iter_mut().zip(&space) {
                    *a += sw[j] * t;
                }
            }
        }
        acc.into_iter().map(|a| (a * self.dtau()).sqrt()).collect()
    }
}

/// `ψ_T(t)·U(t)φ` with `φ̂` the random radial annulus profile at `λ`
/// (same distribution as the 3D annulus samples).
pub fn sample_radial_annulus(
    seed: u64,
    lambda: f64,
    grid: RadialGrid,
    n_t: usize,
    t_cutoff: f64,
    m: f64,
) -> Result<RadialSpaceTime> {
    if !(t_cutoff > 0.0) {
        return Err(LabError::InvalidParameter(format!("T must be positive, got {t_cutoff}")));
    }
    let t_period = 4.0 * t_cutoff;
    let rho_max = grid.k(grid.n_r() - 1);
    if 2.0 * lambda > 2.0 / 3.0 * rho_max {
        return Err(LabError::InvalidGrid(format!(
            "annulus reaches {} beyond 2/3 of the radial band limit {rho_max:.3}",
            2.0 * lambda
        )));
    }
    if 2.0 * t_cutoff > 0.5 * grid.r_max() {
        return Err(LabError::InvalidGrid(format!(
            "r_max = {} too small for waves travelling to |t| = {}",
            grid.r_max(),
            2.0 * t_cutoff
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef = annulus_coefficients(&mut rng);
    let rhos = grid.wavenumbers();
    let hat: Vec<Complex64> = rhos.iter().map(|&r| annulus_profile(&coef, lambda, r)).collect();
    let omega: Vec<f64> = rhos.iter().map(|&r| phi_m([r, 0.0, 0.0], m)).collect();
    let dt = t_period / n_t as f64;
    let tmax = omega
        .iter()
        .zip(&hat)
        .filter(|(_, h)| **h != Complex64::default())
        .map(|(w, _)| w.abs())
        .fold(0.0, f64::max);
    if tmax + 4.0 * 2.0 * PI / t_period >= PI / dt {
        return Err(LabError::InvalidGrid(format!(
            "time Nyquist {:.3} too small for |phi_m| up to {tmax:.3}; increase n_t",
            PI / dt
        )));
    }
    let n = grid.n_r();
    let mut values = vec![Complex64::default(); n_t * n];
    values.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
        let t = (j as f64 - (n_t / 2) as f64) * dt;
        let cut = beta1(t / t_cutoff);
        if cut == 0.0 {
            return;
        }
        let v: Vec<Complex64> = hat
            .iter()
            .zip(&omega)
            .map(|(h, w)| h * Complex64::from_polar(cut, t * w))
            .collect();
        let p = RadialProfile::from_values(grid, v, Representation::Spectral).expect("length");
        out.copy_from_slice(p.to_physical().values());
    });
    RadialSpaceTime::new(grid, n_t, t_period, values)
}

/// `‖P_μ(P_λũ₁ P_λũ₂)‖_{L²}` with its radial (`μ‖u₁‖_{0,b}‖u₂‖_{0,b}`) and
/// general (`μ^{1/2}‖u₁‖_{1/4,b}‖u₂‖_{1/4,b}`) normalizations.
pub fn radial_bilinear_parts(
    u1: &RadialSpaceTime,
    u2: &RadialSpaceTime,
    mu: f64,
    lambda: f64,
    b: f64,
    conj: Conjugation,
) -> Result<(f64, f64, f64)> {
    Ok(radial_bilinear_sweep(u1, u2, &[mu], lambda, b, conj)?[0])
}

/// [`radial_bilinear_parts`] for several `μ`, sharing the projections and norms.
pub fn radial_bilinear_sweep(
    u1: &RadialSpaceTime,
    u2: &RadialSpaceTime,
    mus: &[f64],
    lambda: f64,
    b: f64,
    conj: Conjugation,
) -> Result<Vec<(f64, f64, f64)>> {
    if !(b > 0.5) {
        return Err(LabError::InvalidParameter(format!("bilinear probe needs b > 1/2, got {b}")));
    }
    if let Some(mu) = mus.iter().find(|&&mu| !(mu > 0.0 && lambda >= mu)) {
        return Err(LabError::InvalidParameter(format!(
            "radial form needs 0 < mu <= lambda (mu = {mu}, lambda = {lambda})"
        )));
    }
    let tilde = |u: &RadialSpaceTime, c: bool| {
        let p = u.apply_symbol(|k| beta_lambda(lambda, k));
        if c {
            p.conj()
        } else {
            p
        }
    };
    let prod = tilde(u1, conj.first).mul(&tilde(u2, conj.second))?;
    let n1 = u1.xsb_norms(&[0.0, 0.25], b);
    let n2 = u2.xsb_norms(&[0.0, 0.25], b);
    Ok(mus
        .iter()
        .map(|&mu| {
            let num = prod.apply_symbol(|k| beta_lambda(mu, k)).l2_norm();
            (num, mu * n1[0] * n2[0], mu.sqrt() * n1[1] * n2[1])
        })
        .collect())
}
