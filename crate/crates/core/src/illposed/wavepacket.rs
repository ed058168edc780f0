use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quad::gauss_legendre;
use crate::spectral::{Field, Grid3};

/// Frequency-side counterexample data: sharp indicators of a cube pair
/// `W_λ^± = {|ξ₁ ∓ λ| ≤ μ, |ξ₂|, |ξ₃| ≤ μ}` with `μ = δλ^{1/2}`, or of the
/// annulus `A_λ = {λ ≤ |ξ| ≤ 2λ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WavepacketSpec {
    CubePair { lambda: f64, delta: f64 },
    Annulus { lambda: f64 },
}

/// Largest admissible `μ/λ` for the cube pair.
pub const MAX_MU_OVER_LAMBDA: f64 = 0.25;

impl WavepacketSpec {
    pub fn cube_pair(lambda: f64, delta: f64) -> Result<Self> {
        let s = WavepacketSpec::CubePair { lambda, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn annulus(lambda: f64) -> Result<Self> {
        let s = WavepacketSpec::Annulus { lambda };
        s.validate()?;
        Ok(s)
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            WavepacketSpec::CubePair { lambda, .. } | WavepacketSpec::Annulus { lambda } => lambda,
        }
    }

    /// Cube half-side `μ = δλ^{1/2}` (zero for the annulus).
    pub fn mu(&self) -> f64 {
        match *self {
            WavepacketSpec::CubePair { lambda, delta } => delta * lambda.sqrt(),
            WavepacketSpec::Annulus { .. } => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lambda = self.lambda();
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(LabError::InvalidParameter(format!("lambda must be >= 1, got {lambda}")));
        }
        match *self {
            WavepacketSpec::CubePair { delta, .. } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(LabError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
                }
                if self.mu() > MAX_MU_OVER_LAMBDA * lambda {
                    return Err(LabError::InvalidParameter(format!(
                        "mu = {} exceeds lambda/4 = {}",
                        self.mu(),
                        lambda / 4.0
                    )));
                }
            }
            WavepacketSpec::Annulus { .. } => {
                if lambda < 4.0 {
                    return Err(LabError::InvalidParameter(format!("annulus needs lambda >= 4, got {lambda}")));
                }
            }
        }
        Ok(())
    }

    /// Largest coordinate magnitude on the support.
    pub fn extent(&self) -> f64 {
        match *self {
            WavepacketSpec::CubePair { lambda, .. } => lambda + self.mu(),
            WavepacketSpec::Annulus { lambda } => 2.0 * lambda,
        }
    }

    pub fn contains(&self, xi: [f64; 3]) -> bool {
        match *self {
            WavepacketSpec::CubePair { lambda, .. } => in_cube(xi, [lambda, 0.0, 0.0], self.mu()),
            WavepacketSpec::Annulus { lambda } => in_annulus(xi, lambda),
        }
    }

    /// `∫⟨ξ⟩^{2s}` over the support, i.e. `‖φ‖²_{H^s}`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let jb = |x: f64| (1.0 + x).powf(s);
        match *self {
            WavepacketSpec::CubePair { lambda, .. } => {
                let mu = self.mu();
                let gx = gauss_legendre(24, lambda - mu, lambda + mu);
                let gy = gauss_legendre(24, -mu, mu);
                let mut acc = 0.0;
                for &(x, wx) in &gx {
                    for &(y, wy) in &gy {
                        for &(z, wz) in &gy {
                            acc += wx * wy * wz * jb(x * x + y * y + z * z);
                        }
                    }
                }
                acc
            }
            WavepacketSpec::Annulus { lambda } => gauss_legendre(48, lambda, 2.0 * lambda)
                .iter()
                .map(|&(r, w)| w * 4.0 * std::f64::consts::PI * r * r * jb(r * r))
                .sum(),
        }
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }
}

pub(crate) fn in_cube(xi: [f64; 3], c: [f64; 3], half: f64) -> bool {
    (xi[0] - c[0]).abs() <= half && (xi[1] - c[1]).abs() <= half && (xi[2] - c[2]).abs() <= half
}

pub(crate) fn in_annulus(xi: [f64; 3], lambda: f64) -> bool {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    r2 >= lambda * lambda && r2 <= 4.0 * lambda * lambda
}

fn check_fits(extent: f64, grid: &Grid3) -> Result<()> {
    let nyquist = grid.nyquist();
    if extent >= nyquist {
        return Err(LabError::SupportOverflow {
            extent,
            nyquist,
            min_n: grid.min_n_for_extent(extent),
        });
    }
    Ok(())
}

/// Spectral field equal to the indicator of the support.
pub fn build_wavepacket(spec: &WavepacketSpec, grid: &Grid3) -> Result<Field> {
    spec.validate()?;
    check_fits(spec.extent(), grid)?;
    Ok(Field::from_spectral_fn(*grid, |k| {
        if spec.contains(k) {
            1.0.into()
        } else {
            0.0.into()
        }
    }))
}

/// Envelope `w` of the cube packet `φ = e^{iλx₁}w`: the indicator of
/// `[−μ, μ]³` on the grid. Returns `(w, carrier)`.
pub fn build_envelope(spec: &WavepacketSpec, grid: &Grid3) -> Result<(Field, [f64; 3])> {
    spec.validate()?;
    let WavepacketSpec::CubePair { lambda, .. } = *spec else {
        return Err(LabError::InvalidParameter("envelope form needs a cube pair".into()));
    };
    let mu = spec.mu();
    check_fits(mu, grid)?;
    let w = Field::from_spectral_fn(*grid, |k| {
        if in_cube(k, [0.0; 3], mu) {
            1.0.into()
        } else {
            0.0.into()
        }
    });
    Ok((w, [lambda, 0.0, 0.0]))
}
