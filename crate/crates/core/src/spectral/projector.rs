use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::Grid3;

/// Even bump with `β₁ = 1` on `[−1, 1]`, `0` outside `(−2, 2)`, joined by a
/// quintic smoothstep (C² at both ends).
pub fn beta1(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let x = a - 1.0;
        1.0 - x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
}

/// `β_λ(s) = β₁(s/λ) − β₁(2s/λ)` for `λ > 1`; `λ = 1` is the low-frequency piece `β₁`.
pub fn beta_lambda(lambda: f64, s: f64) -> f64 {
    if lambda <= 1.0 {
        beta1(s)
    } else {
        beta1(s / lambda) - beta1(2.0 * s / lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjectorSpec {
    /// Littlewood–Paley piece `P_λ`.
    SmoothDyadic { lambda: f64 },
    /// `P_{≤λ}` with symbol `β₁(|ξ|/λ)`.
    SmoothLow { lambda: f64 },
    SharpBall { center: [f64; 3], radius: f64 },
    /// `|ξ_i − c_i| ≤ half_side` for every axis.
    SharpCube { center: [f64; 3], half_side: f64 },
    /// `λ ≤ |ξ| ≤ 2λ`.
    SharpAnnulus { lambda: f64 },
}

impl ProjectorSpec {
    pub fn symbol(&self, xi: [f64; 3]) -> f64 {
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match *self {
            ProjectorSpec::SmoothDyadic { lambda } => beta_lambda(lambda, norm(xi)),
            ProjectorSpec::SmoothLow { lambda } => beta1(norm(xi) / lambda),
            ProjectorSpec::SharpBall { center, radius } => ind(
                norm([xi[0] - center[0], xi[1] - center[1], xi[2] - center[2]]) <= radius,
            ),
            ProjectorSpec::SharpCube { center, half_side } => ind((0..3)
                .all(|i| (xi[i] - center[i]).abs() <= half_side)),
            ProjectorSpec::SharpAnnulus { lambda } => {
                let k = norm(xi);
                ind(k >= lambda && k <= 2.0 * lambda)
            }
        }
    }

    pub fn is_sharp(&self) -> bool {
        !matches!(
            self,
            ProjectorSpec::SmoothDyadic { .. } | ProjectorSpec::SmoothLow { .. }
        )
    }

    /// Number of lattice frequencies where the symbol is nonzero.
    pub fn support_count(&self, grid: &Grid3) -> usize {
        (0..grid.len())
            .into_par_iter()
            .filter(|&i| self.symbol(grid.frequency(i)) != 0.0)
            .count()
    }
}

/// Result of a projection; `empty` flags a region missing the frequency lattice.
#[derive(Debug, Clone)]
pub struct Projection {
    pub field: Field,
    pub retained_modes: usize,
    pub empty: bool,
}

pub fn project(u: &Field, p: &ProjectorSpec) -> Field {
    project_with_info(u, p).field
}

pub fn project_with_info(u: &Field, p: &ProjectorSpec) -> Projection {
    let mut s = u.to_spectral();
    let grid = *u.grid();
    let kept: usize = s
        .values_mut()
        .par_iter_mut()
        .enumerate()
        .map(|(i, v)| {
            let w = p.symbol(grid.frequency(i));
            *v *= Complex64::new(w, 0.0);
            usize::from(w != 0.0)
        })
        .sum();
    Projection {
        field: s.to_representation(u.representation()),
        retained_modes: kept,
        empty: kept == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(beta1(0.0), 1.0);
        assert_eq!(beta1(-1.0), 1.0);
        assert_eq!(beta1(2.0), 0.0);
        assert!((beta1(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(beta1(1.3), beta1(-1.3));
        let mut prev = 1.0;
        for i in 0..=100 {
            let b = beta1(1.0 + i as f64 / 100.0);
            assert!(b <= prev + 1e-15);
            prev = b;
        }
    }

    #[test]
    fn empty_region_is_flagged() {
        let g = Grid3::new(8, 8.0).unwrap();
        let u = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let p = ProjectorSpec::SharpCube {
            center: [0.3, 0.3, 0.3],
            half_side: 0.1,
        };
        let out = project_with_info(&u, &p);
        assert!(out.empty);
        assert_eq!(out.field.l2_norm(), 0.0);
    }
}
