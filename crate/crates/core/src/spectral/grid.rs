use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Periodic cubic grid on the torus `[-L/2, L/2)^3`.
///
/// Physical points sit at `x_j = (j - n/2) dx`; wavenumbers follow the usual
/// FFT ordering `k = 0, 1, .., n/2 - 1, -n/2, .., -1` scaled by `2π/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    n: usize,
    box_length: f64,
}

impl Default for Grid3 {
    fn default() -> Self {
        Grid3 {
            n: 64,
            box_length: 32.0,
        }
    }
}

impl Grid3 {
    pub fn new(n_per_dim: usize, box_length: f64) -> Result<Self> {
        if n_per_dim < 2 || !n_per_dim.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "n_per_dim must be a power of two >= 2, got {n_per_dim}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        Ok(Grid3 {
            n: n_per_dim,
            box_length,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Spacing of the frequency lattice, `2π/L`.
    #[inline]
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    #[inline]
    pub fn spectral_cell_volume(&self) -> f64 {
        self.dk().powi(3)
    }

    /// Largest resolved wavenumber per axis, `π/dx`.
    #[inline]
    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }

    /// Signed integer wavenumber of FFT index `j`.
    #[inline]
    pub fn signed_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    #[inline]
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 * self.dk()
    }

    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx()
    }

    /// Flat index for `(ix, iy, iz)`, x fastest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn unravel(&self, i: usize) -> (usize, usize, usize) {
        // n is a power of two
        let s = self.n.trailing_zeros();
        let mask = self.n - 1;
        (i & mask, (i >> s) & mask, i >> (2 * s))
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        let (a, b, c) = self.unravel(i);
        [self.coordinate(a), self.coordinate(b), self.coordinate(c)]
    }

    pub fn frequency(&self, i: usize) -> [f64; 3] {
        let (a, b, c) = self.unravel(i);
        [self.wavenumber(a), self.wavenumber(b), self.wavenumber(c)]
    }

    pub fn frequency_norm(&self, i: usize) -> f64 {
        let k = self.frequency(i);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    }

    /// True when any axis of flat index `i` sits on the unpaired `-n/2` line.
    #[inline]
    pub fn on_nyquist(&self, i: usize) -> bool {
        let (a, b, c) = self.unravel(i);
        let h = self.n / 2;
        a == h || b == h || c == h
    }

    /// `|ξ|` for every mode in flat order.
    pub fn frequency_norms(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.frequency_norm(i)).collect()
    }

    /// Smallest power-of-two `n` (same box) whose Nyquist ball strictly contains radius `extent`.
    pub fn min_n_for_extent(&self, extent: f64) -> usize {
        let mut n = 2usize;
        while PI * n as f64 / self.box_length <= extent {
            n *= 2;
        }
        n
    }
}
