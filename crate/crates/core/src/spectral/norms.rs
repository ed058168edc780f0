use super::field::Field;
use crate::par::sum_by;

/// `‖u‖_{H^s} = (∫ ⟨ξ⟩^{2s} |û(ξ)|² dξ)^{1/2}` on the frequency lattice.
pub fn sobolev_norm(u: &Field, s: f64) -> f64 {
    let spec = u.to_spectral();
    let grid = *u.grid();
    let v = spec.values();
    let sum = sum_by(v.len(), |i| (1.0 + grid.frequency_norm(i).powi(2)).powf(s) * v[i].norm_sqr());
    (sum * grid.spectral_cell_volume()).sqrt()
}

/// Homogeneous `Ḣ^s` seminorm, `(∫ |ξ|^{2s} |û|²)^{1/2}`; the zero mode is skipped.
pub fn homogeneous_sobolev_norm(u: &Field, s: f64) -> f64 {
    let spec = u.to_spectral();
    let grid = *u.grid();
    let v = spec.values();
    let sum = sum_by(v.len(), |i| {
        let k = grid.frequency_norm(i);
        if k == 0.0 {
            0.0
        } else {
            k.powf(2.0 * s) * v[i].norm_sqr()
        }
    });
    (sum * grid.spectral_cell_volume()).sqrt()
}
