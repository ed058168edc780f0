use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fft::{fft3, Direction};
use super::grid::Grid3;
use crate::error::{LabError, Result};
use crate::par::sum_by;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Physical,
    Spectral,
}

/// Complex field on a [`Grid3`], stored x-fastest.
///
/// The spectral representation uses the unitary convention
/// `û(ξ) = (2π)^{-3/2} ∫ e^{-ix·ξ} u(x) dx`, discretized with the box rule,
/// so `Σ|u|² dx³ = Σ|û|² dk³` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid3,
    values: Vec<Complex64>,
    repr: Representation,
}

#[inline]
fn parity_sign(grid: &Grid3, i: usize) -> f64 {
    let (a, b, c) = grid.unravel(i);
    if (a + b + c) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Physical samples -> unitary spectral coefficients, in place.
pub(crate) fn forward_in_place(grid: &Grid3, data: &mut [Complex64]) {
    let n = grid.n();
    fft3(data, n, Direction::Forward);
    let scale = grid.cell_volume() * (2.0 * PI).powf(-1.5);
    let g = *grid;
    data.par_iter_mut().enumerate().for_each(|(i, v)| {
        *v *= scale * parity_sign(&g, i);
    });
}

/// Unitary spectral coefficients -> physical samples, in place.
pub(crate) fn inverse_in_place(grid: &Grid3, data: &mut [Complex64]) {
    let n = grid.n();
    let scale = (2.0 * PI).powf(1.5) / grid.box_length().powi(3);
    let g = *grid;
    data.par_iter_mut().enumerate().for_each(|(i, v)| {
        *v *= scale * parity_sign(&g, i);
    });
    fft3(data, n, Direction::Inverse);
}

impl Field {
    pub fn zeros(grid: Grid3, repr: Representation) -> Self {
        Field {
            grid,
            values: vec![Complex64::default(); grid.len()],
            repr,
        }
    }

    pub fn from_values(grid: Grid3, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field { grid, values, repr })
    }

    /// Sample `f(x)` at every physical grid point.
    pub fn from_fn<F>(grid: Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        Field {
            grid,
            values,
            repr: Representation::Physical,
        }
    }

    /// Spectral field with `û(ξ) = f(ξ)` on the frequency lattice.
    pub fn from_spectral_fn<F>(grid: Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.frequency(i)))
            .collect();
        Field {
            grid,
            values,
            repr: Representation::Spectral,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn representation(&self) -> Representation {
        self.repr
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn to_spectral(&self) -> Field {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => {
                let mut v = self.values.clone();
                forward_in_place(&self.grid, &mut v);
                Field {
                    grid: self.grid,
                    values: v,
                    repr: Representation::Spectral,
                }
            }
        }
    }

    pub fn to_physical(&self) -> Field {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => {
                let mut v = self.values.clone();
                inverse_in_place(&self.grid, &mut v);
                Field {
                    grid: self.grid,
                    values: v,
                    repr: Representation::Physical,
                }
            }
        }
    }

    pub fn to_representation(&self, repr: Representation) -> Field {
        match repr {
            Representation::Physical => self.to_physical(),
            Representation::Spectral => self.to_spectral(),
        }
    }

    /// Measure attached to one sample in the current representation.
    pub fn cell_measure(&self) -> f64 {
        match self.repr {
            Representation::Physical => self.grid.cell_volume(),
            Representation::Spectral => self.grid.spectral_cell_volume(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let s = sum_by(self.values.len(), |i| self.values[i].norm_sqr());
        s * self.cell_measure()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `⟨self, other⟩ = ∫ conj(self)·other`, both taken in `self`'s representation.
    pub fn inner(&self, other: &Field) -> Complex64 {
        let o = other.to_representation(self.repr);
        let s = sum_by(self.values.len(), |i| self.values[i].conj() * o.values[i]);
        s * self.cell_measure()
    }

    /// Sup norm of the physical samples.
    pub fn linf_norm(&self) -> f64 {
        let p = self.to_physical();
        p.values.par_iter().map(|v| v.norm()).reduce(|| 0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        out.values.par_iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add(&self, other: &Field) -> Field {
        let o = other.to_representation(self.repr);
        let mut out = self.clone();
        out.values
            .par_iter_mut()
            .zip(o.values.par_iter())
            .for_each(|(a, b)| *a += b);
        out
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `|u|²` in physical space.
    pub fn density(&self) -> Field {
        let p = self.to_physical();
        let values = p
            .values
            .par_iter()
            .map(|v| Complex64::new(v.norm_sqr(), 0.0))
            .collect();
        Field {
            grid: self.grid,
            values,
            repr: Representation::Physical,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.par_iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid3, w: f64) -> Field {
        Field::from_fn(grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            Complex64::new((-r2 / (2.0 * w * w)).exp(), 0.0)
        })
    }

    #[test]
    fn gaussian_is_self_dual() {
        // e^{-|x|²/2} has unitary transform e^{-|ξ|²/2}
        let g = Grid3::new(32, 16.0).unwrap();
        let s = gaussian(g, 1.0).to_spectral();
        for (i, v) in s.values().iter().enumerate() {
            let k2 = g.frequency_norm(i).powi(2);
            assert!((v - Complex64::new((-k2 / 2.0).exp(), 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn plane_wave_lands_on_one_mode() {
        let g = Grid3::new(16, 2.0 * PI).unwrap();
        let u = Field::from_fn(g, |x| Complex64::from_polar(1.0, 3.0 * x[1]));
        let s = u.to_spectral();
        let peak = g.index(0, 3, 0);
        for (i, v) in s.values().iter().enumerate() {
            if i == peak {
                assert!(v.norm() > 1.0);
            } else {
                assert!(v.norm() < 1e-10);
            }
        }
        assert!((u.l2_norm() - s.l2_norm()).abs() < 1e-12 * u.l2_norm());
    }
}
