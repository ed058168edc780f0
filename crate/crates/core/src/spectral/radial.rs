//! Radial free-space discretization.
//!
//! Samples live at the cell midpoints `r_j = (j+½)h`, `h = r_max/N`, and the
//! spectral side at `ρ_k = (k+½)π/r_max`. The 3D radial transform
//! `f̂(ρ) = √(2/π) ρ⁻¹ ∫ sin(ρr) r f(r) dr` then becomes a DST-IV, which is
//! its own inverse up to `N/2`; both directions are exact discrete inverses
//! and preserve `∫|f|² 4πr²dr` exactly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustdct::{DctPlanner, TransformType4};
use serde::{Deserialize, Serialize};

use super::field::Representation;
use super::multiplier::{validate_density, MultiplierSymbol};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    n_r: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid {
            r_max: 64.0,
            n_r: 4096,
        }
    }
}

impl RadialGrid {
    pub fn new(r_max: f64, n_r: usize) -> Result<Self> {
        if n_r < 2 {
            return Err(LabError::InvalidGrid(format!("n_r must be >= 2, got {n_r}")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(LabError::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        Ok(RadialGrid { r_max, n_r })
    }

    #[inline]
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }

    #[inline]
    pub fn dk(&self) -> f64 {
        PI / self.r_max
    }

    #[inline]
    pub fn k(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dk()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_r).map(|j| self.r(j)).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_r).map(|j| self.k(j)).collect()
    }

    /// `4π r_j² h`, the midpoint weight for `∫ · dx` on radial functions.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n_r)
            .map(|j| 4.0 * PI * self.r(j).powi(2) * h)
            .collect()
    }

    pub fn spectral_weights(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.n_r)
            .map(|j| 4.0 * PI * self.k(j).powi(2) * dk)
            .collect()
    }
}

fn dst4_plan(n: usize) -> Arc<dyn TransformType4<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<dyn TransformType4<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("dst plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| DctPlanner::new().plan_dst4(n))
        .clone()
}

/// Unnormalized `S_{kj} = sin(π(k+½)(j+½)/N)` applied to a real buffer.
pub fn dst4(buf: &mut [f64]) {
    dst4_plan(buf.len()).process_dst4(buf);
}

fn dst4_complex(data: &[Complex64]) -> Vec<Complex64> {
    let mut re: Vec<f64> = data.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = data.iter().map(|v| v.im).collect();
    dst4(&mut re);
    if im.iter().any(|&x| x != 0.0) {
        dst4(&mut im);
    }
    re.into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect()
}

/// Radial function sampled on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<Complex64>,
    repr: Representation,
}

impl RadialProfile {
    pub fn zeros(grid: RadialGrid, repr: Representation) -> Self {
        RadialProfile {
            grid,
            values: vec![Complex64::default(); grid.n_r()],
            repr,
        }
    }

    pub fn from_values(grid: RadialGrid, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.n_r() {
            return Err(LabError::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.n_r(),
                values.len()
            )));
        }
        Ok(RadialProfile { grid, values, repr })
    }

    pub fn from_real(grid: RadialGrid, values: &[f64]) -> Result<Self> {
        Self::from_values(
            grid,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Representation::Physical,
        )
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F) -> Self {
        RadialProfile {
            grid,
            values: (0..grid.n_r()).map(|j| f(grid.r(j))).collect(),
            repr: Representation::Physical,
        }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: RadialGrid, f: F) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    #[inline]
    pub fn grid(&self) -> &RadialGrid {
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

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    fn coords(&self) -> Vec<f64> {
        match self.repr {
            Representation::Physical => self.grid.radii(),
            Representation::Spectral => self.grid.wavenumbers(),
        }
    }

    fn weights(&self) -> Vec<f64> {
        match self.repr {
            Representation::Physical => self.grid.weights(),
            Representation::Spectral => self.grid.spectral_weights(),
        }
    }

    /// Hankel-type sine transform; self-inverse, so the same map serves both directions.
    fn transformed(&self, to: Representation) -> RadialProfile {
        let g = self.grid;
        let x = self.coords();
        let y = match to {
            Representation::Physical => g.radii(),
            Representation::Spectral => g.wavenumbers(),
        };
        let step = match self.repr {
            Representation::Physical => g.h(),
            Representation::Spectral => g.dk(),
        };
        let weighted: Vec<Complex64> = self
            .values
            .iter()
            .zip(&x)
            .map(|(v, &xi)| v * xi)
            .collect();
        let s = dst4_complex(&weighted);
        let c = (2.0 / PI).sqrt() * step;
        RadialProfile {
            grid: g,
            values: s.iter().zip(&y).map(|(v, &yi)| v * (c / yi)).collect(),
            repr: to,
        }
    }

    pub fn to_spectral(&self) -> RadialProfile {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => self.transformed(Representation::Spectral),
        }
    }

    pub fn to_physical(&self) -> RadialProfile {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => self.transformed(Representation::Physical),
        }
    }

    pub fn to_representation(&self, repr: Representation) -> RadialProfile {
        match repr {
            Representation::Physical => self.to_physical(),
            Representation::Spectral => self.to_spectral(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(self.weights())
            .map(|(v, w)| v.norm_sqr() * w)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `∫ conj(self)·other dx` in `self`'s representation.
    pub fn inner(&self, other: &RadialProfile) -> Complex64 {
        let o = other.to_representation(self.repr);
        self.values
            .iter()
            .zip(&o.values)
            .zip(self.weights())
            .map(|((a, b), w)| a.conj() * b * w)
            .sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.to_physical()
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> RadialProfile {
        RadialProfile {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            repr: self.repr,
        }
    }

    pub fn scale(&self, c: f64) -> RadialProfile {
        self.map(|v| v * c)
    }

    pub fn sub(&self, other: &RadialProfile) -> RadialProfile {
        let o = other.to_representation(self.repr);
        RadialProfile {
            grid: self.grid,
            values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect(),
            repr: self.repr,
        }
    }

    pub fn density(&self) -> RadialProfile {
        self.to_physical().map(|v| Complex64::new(v.norm_sqr(), 0.0))
    }

    /// `|f(r_last)| / max|f|` in physical space.
    pub fn tail_ratio(&self) -> f64 {
        let p = self.to_physical();
        let max = p.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            0.0
        } else {
            p.values.last().map(|v| v.norm()).unwrap_or(0.0) / max
        }
    }

    /// Errors when the profile has not decayed below `tol` (relative) at `r_max`.
    pub fn check_decay(&self, tol: f64) -> Result<()> {
        let ratio = self.tail_ratio();
        if ratio > tol {
            Err(LabError::Truncation { ratio })
        } else {
            Ok(())
        }
    }

    /// Sine-series coefficients `a` with `r f(r) = Σ a_k sin(ρ_k r)`.
    fn sine_coefficients(&self) -> Vec<Complex64> {
        let p = self.to_physical();
        let g = self.grid;
        let w: Vec<Complex64> = p
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * g.r(j))
            .collect();
        let n = g.n_r() as f64;
        dst4_complex(&w).into_iter().map(|v| v * (2.0 / n)).collect()
    }

    /// Band-limited interpolation at arbitrary radii (zero beyond `r_max`).
    pub fn interpolate(&self, radii: &[f64]) -> Vec<Complex64> {
        let a = self.sine_coefficients();
        let g = self.grid;
        let ks = g.wavenumbers();
        let at = |r: f64| -> Complex64 {
            if r >= g.r_max() {
                return Complex64::default();
            }
            let r = r.max(1e-300);
            // sin(ρ_k r) by the angle-addition recurrence
            let d = g.dk() * r;
            let (sd, cd) = d.sin_cos();
            let (mut s, mut c) = (0.5 * d).sin_cos();
            let mut acc = Complex64::default();
            for ak in &a {
                acc += ak * s;
                let ns = s * cd + c * sd;
                c = c * cd - s * sd;
                s = ns;
            }
            let _ = &ks;
            acc / r
        };
        radii.iter().map(|&r| at(r)).collect()
    }

    /// `f(x) ↦ κ^{3/2} f(κx)`, the L²-preserving dilation.
    pub fn dilate(&self, kappa: f64) -> Result<RadialProfile> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "dilation factor must be positive, got {kappa}"
            )));
        }
        let g = self.grid;
        let pts: Vec<f64> = g.radii().iter().map(|r| r * kappa).collect();
        let vals = self.interpolate(&pts);
        let c = kappa.powf(1.5);
        Ok(RadialProfile {
            grid: g,
            values: vals.into_iter().map(|v| v * c).collect(),
            repr: Representation::Physical,
        })
    }
}

/// Multiply the radial spectrum by a symbol of `|ξ|`; keeps the representation.
pub fn apply_radial_symbol<F: Fn(f64) -> Complex64>(f: &RadialProfile, sym: F) -> RadialProfile {
    let mut s = f.to_spectral();
    let g = *f.grid();
    for (j, v) in s.values_mut().iter_mut().enumerate() {
        *v *= sym(g.k(j));
    }
    s.to_representation(f.representation())
}

pub fn apply_radial_multiplier(f: &RadialProfile, sym: &MultiplierSymbol) -> RadialProfile {
    apply_radial_symbol(f, |k| Complex64::new(sym.eval(k), 0.0))
}

/// `|x|⁻¹ ∗ ρ` for a radial density.
///
/// `4π/|ξ|²` applied in the sine basis equals Newton's shell formula
/// integrated exactly against the sine interpolant of `rρ`, with the
/// boundary condition `(rV)'(r_max) = 0`, i.e. `V = M/r` outside the box.
pub fn radial_coulomb_potential(rho: &RadialProfile) -> Result<RadialProfile> {
    let p = rho.to_physical();
    validate_density(p.values(), 1e-10)?;
    let real = p.map(|v| Complex64::new(v.re, 0.0));
    let v = apply_radial_multiplier(&real, &MultiplierSymbol::Coulomb).map(|v| Complex64::new(v.re, 0.0));
    Ok(v)
}

/// `‖f‖_{H^s}` on the radial spectral grid.
pub fn radial_sobolev_norm(f: &RadialProfile, s: f64) -> f64 {
    let sp = f.to_spectral();
    let g = *f.grid();
    sp.values()
        .iter()
        .zip(g.spectral_weights())
        .enumerate()
        .map(|(j, (v, w))| (1.0 + g.k(j).powi(2)).powf(s) * v.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// `∫ conj(f)·(sym(|D|) g) dx`, the quadratic form of a multiplier.
pub fn radial_quadratic_form(f: &RadialProfile, g_: &RadialProfile, sym: impl Fn(f64) -> f64) -> Complex64 {
    let a = f.to_spectral();
    let b = g_.to_spectral();
    let g = *f.grid();
    a.values()
        .iter()
        .zip(b.values())
        .zip(g.spectral_weights())
        .enumerate()
        .map(|(j, ((x, y), w))| x.conj() * y * sym(g.k(j)) * w)
        .sum()
}
