use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Field, Representation};
use crate::error::{LabError, Result};

/// Radial Fourier multipliers used throughout the lab.
///
/// Negative homogeneous powers (the Coulomb symbol included) vanish at the
/// zero mode, which makes the torus potential mean-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierSymbol {
    /// `m − √(m² + |ξ|²)`
    HalfWave { m: f64 },
    /// `√(m² + |ξ|²)`
    SqrtOp { m: f64 },
    /// `4π/|ξ|²`, the transform of `|x|⁻¹` under the unitary convention
    /// acting on a product (see [`coulomb_potential`]).
    Coulomb,
    /// `⟨ξ⟩^s = (1 + |ξ|²)^{s/2}`
    JapaneseBracketPower { s: f64 },
    /// `|ξ|^α`
    HomogeneousPower { alpha: f64 },
}

impl MultiplierSymbol {
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            MultiplierSymbol::HalfWave { m } => m - (m * m + k * k).sqrt(),
            MultiplierSymbol::SqrtOp { m } => (m * m + k * k).sqrt(),
            MultiplierSymbol::Coulomb => {
                if k == 0.0 {
                    0.0
                } else {
                    4.0 * PI / (k * k)
                }
            }
            MultiplierSymbol::JapaneseBracketPower { s } => (1.0 + k * k).powf(0.5 * s),
            MultiplierSymbol::HomogeneousPower { alpha } => {
                if k == 0.0 {
                    if alpha > 0.0 {
                        0.0
                    } else if alpha == 0.0 {
                        1.0
                    } else {
                        // zero mode dropped for negative powers
                        0.0
                    }
                } else {
                    k.powf(alpha)
                }
            }
        }
    }

    /// Whether the zero mode was replaced by 0 rather than evaluated.
    pub fn drops_zero_mode(&self) -> bool {
        match *self {
            MultiplierSymbol::Coulomb => true,
            MultiplierSymbol::HomogeneousPower { alpha } => alpha < 0.0,
            _ => false,
        }
    }
}

/// `φ_m(ξ) = m − √(m² + |ξ|²)`.
pub fn half_wave_symbol(xi: [f64; 3], m: f64) -> f64 {
    let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    m - (m * m + k2).sqrt()
}

/// Multiply the spectrum by an arbitrary function of the frequency vector.
/// The output keeps the input's representation.
pub fn apply_symbol_fn<F>(u: &Field, f: F) -> Field
where
    F: Fn([f64; 3]) -> Complex64 + Sync,
{
    let mut s = u.to_spectral();
    let grid = *u.grid();
    s.values_mut().par_iter_mut().enumerate().for_each(|(i, v)| {
        *v *= f(grid.frequency(i));
    });
    s.to_representation(u.representation())
}

pub fn apply_multiplier(u: &Field, sym: &MultiplierSymbol) -> Field {
    let mut s = u.to_spectral();
    let grid = *u.grid();
    s.values_mut().par_iter_mut().enumerate().for_each(|(i, v)| {
        *v *= sym.eval(grid.frequency_norm(i));
    });
    s.to_representation(u.representation())
}

/// Check that `rho` is a real, nonnegative density within `tol` (relative to its sup).
pub fn validate_density(values: &[Complex64], tol: f64) -> Result<()> {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let bound = tol * max.max(1.0);
    for v in values {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LabError::InvalidDensity("non-finite sample".into()));
        }
        if v.im.abs() > bound {
            return Err(LabError::InvalidDensity(format!(
                "imaginary part {:e} exceeds tolerance",
                v.im
            )));
        }
        if v.re < -bound {
            return Err(LabError::InvalidDensity(format!(
                "negative value {:e}",
                v.re
            )));
        }
    }
    Ok(())
}

/// Coulomb potential `|x|⁻¹ ∗ ρ` on the torus.
///
/// With the unitary convention, `F(f∗g) = (2π)^{3/2} f̂ ĝ` and the transform of
/// `|x|⁻¹` is `(2π)^{-3/2}·4π/|ξ|²`, so `V̂ = 4π ρ̂/|ξ|²`. The zero mode is dropped.
pub fn coulomb_potential(rho: &Field) -> Result<Field> {
    let p = rho.to_physical();
    validate_density(p.values(), 1e-10)?;
    let mut real = p.clone();
    real.values_mut().iter_mut().for_each(|v| v.im = 0.0);
    let mut v = apply_multiplier(&real, &MultiplierSymbol::Coulomb);
    if v.representation() != Representation::Physical {
        v = v.to_physical();
    }
    Ok(v)
}
