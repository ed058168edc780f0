use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::par::sum_by;
use crate::spectral::fft::{fft_outer, Direction};
use crate::spectral::field::{forward_in_place, inverse_in_place};
use crate::spectral::Grid3;

/// `u(t, x)` on `t_j = (j − n_t/2)·t_period/n_t` times a spatial grid,
/// stored slice by slice (`values[j·n³ + i]`), physical representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid3,
    n_t: usize,
    t_period: f64,
    values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid3, n_t: usize, t_period: f64, values: Vec<Complex64>) -> Result<Self> {
        if n_t < 2 || n_t % 2 != 0 {
            return Err(LabError::InvalidGrid(format!("n_t must be even and >= 2, got {n_t}")));
        }
        if !(t_period > 0.0 && t_period.is_finite()) {
            return Err(LabError::InvalidGrid(format!("t_period must be positive, got {t_period}")));
        }
        if values.len() != n_t * grid.len() {
            return Err(LabError::InvalidGrid(format!(
                "expected {} values, got {}",
                n_t * grid.len(),
                values.len()
            )));
        }
        Ok(SpaceTimeField {
            grid,
            n_t,
            t_period,
            values,
        })
    }

    pub fn zeros(grid: Grid3, n_t: usize, t_period: f64) -> Result<Self> {
        Self::new(grid, n_t, t_period, vec![Complex64::default(); n_t * grid.len()])
    }

    /// Slices from a closure returning the physical values at time `t`.
    pub fn from_slices<F>(grid: Grid3, n_t: usize, t_period: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<Complex64>,
    {
        let mut u = Self::zeros(grid, n_t, t_period)?;
        let n = grid.len();
        for j in 0..n_t {
            let s = f(u.time(j));
            if s.len() != n {
                return Err(LabError::InvalidGrid("slice length mismatch".into()));
            }
            u.values[j * n..(j + 1) * n].copy_from_slice(&s);
        }
        Ok(u)
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn t_period(&self) -> f64 {
        self.t_period
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

    pub fn slice(&self, j: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.values[j * n..(j + 1) * n]
    }

    fn measure(&self) -> f64 {
        self.grid.cell_volume() * self.dt()
    }

    /// `‖u‖_{L²(ℝ×ℝ³)}` on the grid.
    pub fn l2_norm(&self) -> f64 {
        (sum_by(self.values.len(), |i| self.values[i].norm_sqr()) * self.measure()).sqrt()
    }

    pub fn l4_norm(&self) -> f64 {
        (sum_by(self.values.len(), |i| self.values[i].norm_sqr().powi(2)) * self.measure()).powf(0.25)
    }

    /// Unitary space-time transform, layout `[k·n³ + i]` over `(τ_k, ξ_i)`.
    pub fn spectral(&self) -> Vec<Complex64> {
        let n = self.grid.len();
        let mut data = self.values.clone();
        for slice in data.chunks_mut(n) {
            forward_in_place(&self.grid, slice);
        }
        fft_outer(&mut data, self.n_t, n, Direction::Forward);
        let scale = self.dt() / (2.0 * PI).sqrt();
        data.par_chunks_mut(n).enumerate().for_each(|(k, c)| {
            let f = if k % 2 == 0 { scale } else { -scale };
            c.iter_mut().for_each(|v| *v *= f);
        });
        data
    }

    /// Inverse of [`spectral`](Self::spectral).
    pub fn from_spectral(grid: Grid3, n_t: usize, t_period: f64, mut data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_t * grid.len() || n_t < 2 || n_t % 2 != 0 {
            return Self::new(grid, n_t, t_period, data);
        }
        let n = grid.len();
        let dt = t_period / n_t as f64;
        // undo the forward scaling, including the 1/n_t of the raw inverse DFT
        let scale = (2.0 * PI).sqrt() / (dt * n_t as f64);
        data.par_chunks_mut(n).enumerate().for_each(|(k, c)| {
            let f = if k % 2 == 0 { scale } else { -scale };
            c.iter_mut().for_each(|v| *v *= f);
        });
        fft_outer(&mut data, n_t, n, Direction::Inverse);
        for slice in data.chunks_mut(n) {
            inverse_in_place(&grid, slice);
        }
        Self::new(grid, n_t, t_period, data)
    }

    /// Spatial Fourier multiplier applied slice by slice.
    pub fn apply_spatial_symbol<F>(&self, sym: F) -> SpaceTimeField
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        let n = self.grid.len();
        let g = self.grid;
        let weights: Vec<f64> = (0..n).into_par_iter().map(|i| sym(g.frequency(i))).collect();
        let mut data = self.values.clone();
        for slice in data.chunks_mut(n) {
            forward_in_place(&g, slice);
            slice.par_iter_mut().zip(weights.par_iter()).for_each(|(v, w)| *v *= w);
            inverse_in_place(&g, slice);
        }
        SpaceTimeField { values: data, ..*self }
    }

    pub fn conj(&self) -> SpaceTimeField {
        SpaceTimeField {
            values: self.values.par_iter().map(|v| v.conj()).collect(),
            ..*self
        }
    }

    pub fn mul(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_compatible(other)?;
        Ok(SpaceTimeField {
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(a, b)| a * b)
                .collect(),
            ..*self
        })
    }

    pub fn scale(&self, c: Complex64) -> SpaceTimeField {
        SpaceTimeField {
            values: self.values.par_iter().map(|v| v * c).collect(),
            ..*self
        }
    }

    fn check_compatible(&self, other: &SpaceTimeField) -> Result<()> {
        if self.grid != other.grid || self.n_t != other.n_t || self.t_period != other.t_period {
            return Err(LabError::InvalidGrid("space-time fields live on different grids".into()));
        }
        Ok(())
    }

    /// Whether each time slice is invariant under the grid symmetries fixing
    /// the origin (axis permutations, reflections), to `tol` relative.
    pub fn is_spatially_radial(&self, tol: f64) -> bool {
        let g = self.grid;
        let n = g.n();
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        // x_j ↦ −x_j is j ↦ n − j, and j = 0 is its own image on the torus
        let refl = |j: usize| (n - j) % n;
        (0..self.n_t).into_par_iter().all(|t| {
            let s = self.slice(t);
            (0..g.len()).all(|i| {
                let (x, y, z) = g.unravel(i);
                let v = s[i];
                [
                    g.index(y, x, z),
                    g.index(z, y, x),
                    g.index(x, z, y),
                    g.index(refl(x), y, z),
                ]
                .iter()
                .all(|&j| (s[j] - v).norm() <= tol * scale)
            })
        })
    }
}
