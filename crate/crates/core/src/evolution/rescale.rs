use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::par::sum_by;
use crate::spectral::{Field, RadialProfile, Representation};

/// Fraction of `|û|²` that may fall outside the resolvable window before
/// a dilation is refused.
const SPILL_TOL: f64 = 1e-10;

/// Spatial part of the scaling symmetry, `u ↦ λ^{3/2} u(λ·)`, evaluated by
/// trigonometric interpolation (separable, one axis at a time).
pub fn rescale(u: &Field, lambda: f64) -> Result<Field> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "scaling factor must be positive, got {lambda}"
        )));
    }
    let g = *u.grid();
    let n = g.n();
    let spec = u.to_spectral();
    let total: f64 = spec.values().iter().map(|v| v.norm_sqr()).sum();

    if lambda > 1.0 && total > 0.0 {
        // the dilated spectrum lives at λξ; anything beyond Nyquist/λ is lost
        let cut = g.nyquist() / lambda;
        let sv = spec.values();
        let spill = sum_by(sv.len(), |i| {
            if g.frequency(i).iter().any(|k| k.abs() >= cut) {
                sv[i].norm_sqr()
            } else {
                0.0
            }
        });
        if spill > SPILL_TOL * total {
            let mut extent = 0.0f64;
            for (i, v) in spec.values().iter().enumerate() {
                if v.norm_sqr() > SPILL_TOL * total / g.len() as f64 {
                    let k = g.frequency(i);
                    extent = extent.max(k[0].abs().max(k[1].abs()).max(k[2].abs()));
                }
            }
            let extent = extent * lambda;
            return Err(LabError::SupportOverflow {
                extent,
                nyquist: g.nyquist(),
                min_n: g.min_n_for_extent(extent),
            });
        }
    }
    if lambda < 1.0 && total > 0.0 {
        // u(λx) samples only λ·box; mass outside it would be dropped
        let phys = u.to_physical();
        let half = 0.5 * lambda * g.box_length();
        let all: f64 = phys.values().iter().map(|v| v.norm_sqr()).sum();
        let pv = phys.values();
        let outside = sum_by(pv.len(), |i| {
            if g.position(i).iter().any(|x| x.abs() > half) {
                pv[i].norm_sqr()
            } else {
                0.0
            }
        });
        if outside > SPILL_TOL * all {
            return Err(LabError::InvalidParameter(format!(
                "dilation by {lambda} pushes {:.2e} of the mass outside the box",
                outside / all
            )));
        }
    }

    // e^{i k_q λ x_j} with the same centred coordinates as the grid
    let table: Vec<Complex64> = (0..n)
        .flat_map(|j| {
            let x = lambda * g.coordinate(j);
            (0..n).map(move |q| Complex64::from_polar(1.0, g.wavenumber(q) * x))
        })
        .collect();
    let norm = (2.0 * std::f64::consts::PI).powf(-1.5) * g.spectral_cell_volume();
    let mut data = spec.into_values();
    // the lone Nyquist coefficient has no partner; it is dropped to keep the interpolant real for real data
    for (i, v) in data.iter_mut().enumerate() {
        if g.on_nyquist(i) {
            *v = Complex64::default();
        }
    }
    for _axis in 0..3 {
        // contract the fastest index against the table, rotating axes each pass
        let mut out = vec![Complex64::default(); data.len()];
        out.par_chunks_mut(n).enumerate().for_each(|(row, dst)| {
            let b = row % n;
            let c = row / n;
            for (a, d) in dst.iter_mut().enumerate() {
                // out[a + n b + n² c] = Σ_q T[c][q] data[q + n a + n² b]
                let src = &data[n * a + n * n * b..n * a + n * n * b + n];
                let trow = &table[c * n..c * n + n];
                *d = src.iter().zip(trow).map(|(s, t)| s * t).sum();
            }
        });
        data = out;
    }
    let scale = lambda.powf(1.5) * norm;
    data.par_iter_mut().for_each(|v| *v *= scale);
    Field::from_values(g, data, Representation::Physical)
}

/// Radial counterpart of [`rescale`].
pub fn rescale_radial(u: &RadialProfile, lambda: f64) -> Result<RadialProfile> {
    u.dilate(lambda)
}
