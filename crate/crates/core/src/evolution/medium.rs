//! Common interface over the torus and radial discretizations, so one
//! splitting loop drives both.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::spectral::field::{forward_in_place, inverse_in_place};
use crate::spectral::multiplier::validate_density;
use crate::spectral::{Field, MultiplierSymbol, RadialProfile, Representation};

pub trait Medium: Clone + Send + Sync + Sized {
    /// Spectral coefficients of the state.
    fn spectral_coefficients(&self) -> Vec<Complex64>;
    /// State with the given spectral coefficients on the same grid.
    fn with_spectral(&self, values: Vec<Complex64>) -> Self;
    /// `|ξ|` at each spectral slot.
    fn wavenumbers(&self) -> Vec<f64>;
    fn physical_weights(&self) -> Vec<f64>;
    fn spectral_weights(&self) -> Vec<f64>;
    fn to_physical_buf(&self, buf: &mut [Complex64]);
    fn to_spectral_buf(&self, buf: &mut [Complex64]);
    /// Multiplier applied to the density spectrum to obtain the potential.
    fn coulomb_kernel(&self, dealias: bool) -> Vec<f64>;
    /// `V = K[|u|²]` from physical samples, `K` from [`Medium::coulomb_kernel`].
    fn potential(&self, phys: &[Complex64], kernel: &[f64]) -> Vec<f64> {
        let mut rho: Vec<Complex64> = phys
            .par_iter()
            .map(|v| Complex64::new(v.norm_sqr(), 0.0))
            .collect();
        self.to_spectral_buf(&mut rho);
        rho.par_iter_mut().zip(kernel.par_iter()).for_each(|(r, k)| *r *= k);
        self.to_physical_buf(&mut rho);
        rho.into_par_iter().map(|v| v.re).collect()
    }
}

/// Frequencies kept by the 2/3 rule: every signed index within `n/3`.
pub fn dealias_mask(grid: &crate::spectral::Grid3) -> Vec<bool> {
    let cut = (grid.n() / 3) as i64;
    (0..grid.len())
        .map(|i| {
            let (a, b, c) = grid.unravel(i);
            [a, b, c]
                .iter()
                .all(|&j| grid.signed_index(j).abs() <= cut)
                && !grid.on_nyquist(i)
        })
        .collect()
}

impl Medium for Field {
    fn spectral_coefficients(&self) -> Vec<Complex64> {
        self.to_spectral().into_values()
    }

    fn with_spectral(&self, values: Vec<Complex64>) -> Self {
        Field::from_values(*self.grid(), values, Representation::Spectral)
            .expect("length preserved")
    }

    fn wavenumbers(&self) -> Vec<f64> {
        self.grid().frequency_norms()
    }

    fn physical_weights(&self) -> Vec<f64> {
        vec![self.grid().cell_volume(); self.grid().len()]
    }

    fn spectral_weights(&self) -> Vec<f64> {
        vec![self.grid().spectral_cell_volume(); self.grid().len()]
    }

    fn to_physical_buf(&self, buf: &mut [Complex64]) {
        inverse_in_place(self.grid(), buf);
    }

    fn to_spectral_buf(&self, buf: &mut [Complex64]) {
        forward_in_place(self.grid(), buf);
    }

    fn coulomb_kernel(&self, dealias: bool) -> Vec<f64> {
        let g = self.grid();
        let mask = if dealias {
            dealias_mask(g)
        } else {
            (0..g.len()).map(|i| !g.on_nyquist(i)).collect()
        };
        (0..g.len())
            .map(|i| {
                if mask[i] {
                    MultiplierSymbol::Coulomb.eval(g.frequency_norm(i))
                } else {
                    0.0
                }
            })
            .collect()
    }
}

impl Medium for RadialProfile {
    fn spectral_coefficients(&self) -> Vec<Complex64> {
        self.to_spectral().values().to_vec()
    }

    fn with_spectral(&self, values: Vec<Complex64>) -> Self {
        RadialProfile::from_values(*self.grid(), values, Representation::Spectral)
            .expect("length preserved")
    }

    fn wavenumbers(&self) -> Vec<f64> {
        self.grid().wavenumbers()
    }

    fn physical_weights(&self) -> Vec<f64> {
        self.grid().weights()
    }

    fn spectral_weights(&self) -> Vec<f64> {
        self.grid().spectral_weights()
    }

    fn to_physical_buf(&self, buf: &mut [Complex64]) {
        let p = RadialProfile::from_values(*self.grid(), buf.to_vec(), Representation::Spectral)
            .expect("length preserved")
            .to_physical();
        buf.copy_from_slice(p.values());
    }

    fn to_spectral_buf(&self, buf: &mut [Complex64]) {
        let p = RadialProfile::from_values(*self.grid(), buf.to_vec(), Representation::Physical)
            .expect("length preserved")
            .to_spectral();
        buf.copy_from_slice(p.values());
    }

    fn coulomb_kernel(&self, _dealias: bool) -> Vec<f64> {
        self.grid()
            .wavenumbers()
            .iter()
            .map(|&k| MultiplierSymbol::Coulomb.eval(k))
            .collect()
    }
}

/// Validated Coulomb potential of `|u|²` with the kernel the evolution uses.
pub fn hartree_potential<M: Medium>(u: &M, dealias: bool) -> Result<Vec<f64>> {
    let mut phys = u.spectral_coefficients();
    u.to_physical_buf(&mut phys);
    let kernel = u.coulomb_kernel(dealias);
    let rho: Vec<Complex64> = phys.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
    validate_density(&rho, 1e-10)?;
    Ok(u.potential(&phys, &kernel))
}
