//! Monte-Carlo evaluation of the cubic Picard term on the frequency side,
//!
//! `F_t(ξ) = c e^{itφ_m(ξ)} ∬ (e^{itr}−1)/(ir) · χ(ξ₁)χ(−ξ₂)χ(ξ−ξ₁−ξ₂) / |ξ₁+ξ₂|² dξ₁dξ₂`,
//!
//! with `φ_m(ξ) = m − √(m²+|ξ|²)`, `r = φ_m(ξ₁) − φ_m(ξ₂) + φ_m(ξ−ξ₁−ξ₂) − φ_m(ξ)`
//! and `c = 4π/(2π)³` under the unitary transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wavepacket::{in_annulus, in_cube, WavepacketSpec};
use crate::error::{LabError, Result};

pub const TRILINEAR_CONSTANT: f64 = 1.0 / (2.0 * PI * PI);

const SHARD: usize = 1 << 15;
const SMALL_PHASE: f64 = 1e-4;
const SINGULAR_CUTOFF: f64 = 1e-9;

#[inline]
pub fn phi_m(xi: [f64; 3], m: f64) -> f64 {
    m - (m * m + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// `r_m(ξ₁, ξ₂, ξ)`.
pub fn resonance(xi1: [f64; 3], xi2: [f64; 3], xi: [f64; 3], m: f64) -> f64 {
    let xi3 = sub(sub(xi, xi1), xi2);
    phi_m(xi1, m) - phi_m(xi2, m) + phi_m(xi3, m) - phi_m(xi, m)
}

/// `∫₀^t e^{iτr} dτ = (e^{itr}−1)/(ir)`, with a series for small `|tr|`.
#[inline]
pub fn duhamel_weight(t: f64, r: f64) -> Complex64 {
    let x = t * r;
    if x.abs() < SMALL_PHASE {
        let x2 = x * x;
        t * Complex64::new(1.0 - x2 / 6.0 + x2 * x2 / 120.0, x / 2.0 - x * x2 / 24.0)
    } else {
        duhamel_weight_direct(t, r)
    }
}

#[inline]
pub fn duhamel_weight_direct(t: f64, r: f64) -> Complex64 {
    let (s, c) = (t * r).sin_cos();
    Complex64::new(s / r, (1.0 - c) / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearResult {
    pub xi: [f64; 3],
    pub value: Complex64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Fraction of draws landing in the integration domain.
    pub acceptance: f64,
    /// Draws discarded for `|ξ₁+ξ₂| < 1e−9`.
    pub rejected_singular: usize,
}

impl TrilinearResult {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.value.norm()
    }
}

/// Sampler for the pair `(ξ₁, ζ = ξ₁ + ξ₂)`. `ζ` has density
/// `1/(4πR|ζ|²)` on the ball of radius `R`, which cancels the Coulomb
/// singularity; `ξ₁` is uniform on the support of `χ`.
struct Sampler {
    spec: WavepacketSpec,
    xi: [f64; 3],
    radius: f64,
    /// `vol(supp χ) · 4πR`.
    scale: f64,
}

impl Sampler {
    fn new(spec: &WavepacketSpec, xi: [f64; 3]) -> Result<Self> {
        let empty = || {
            LabError::EmptySupport(format!(
                "xi = {xi:?} is outside the reachable sum-set of {spec:?}"
            ))
        };
        let (radius, vol) = match *spec {
            WavepacketSpec::CubePair { lambda, .. } => {
                // ζ ∈ W⁺ + W⁻ = [−2μ, 2μ]³ and ξ − ζ ∈ W⁺
                let mu = spec.mu();
                let c = [lambda, 0.0, 0.0];
                let mut r2 = 0.0;
                for i in 0..3 {
                    let lo = (-2.0 * mu).max(xi[i] - c[i] - mu);
                    let hi = (2.0 * mu).min(xi[i] - c[i] + mu);
                    if lo > hi {
                        return Err(empty());
                    }
                    r2 += lo.abs().max(hi.abs()).powi(2);
                }
                (r2.sqrt(), (2.0 * mu).powi(3))
            }
            WavepacketSpec::Annulus { lambda } => {
                let n = norm(xi);
                if n > 6.0 * lambda {
                    return Err(empty());
                }
                let vol = 4.0 * PI / 3.0 * 7.0 * lambda.powi(3);
                ((4.0 * lambda).min(n + 2.0 * lambda), vol)
            }
        };
        Ok(Sampler {
            spec: *spec,
            xi,
            radius,
            scale: vol * 4.0 * PI * radius,
        })
    }

    #[inline]
    fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
        let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let ph = 2.0 * PI * rng.random::<f64>();
        let s = (1.0 - z * z).max(0.0).sqrt();
        let (sn, cs) = ph.sin_cos();
        [s * cs, s * sn, z]
    }

    /// One draw: `Some(ξ₁, ξ₂)` inside the domain, `None` outside; the
    /// boolean flags a singular rejection.
    #[inline]
    fn draw<R: Rng>(&self, rng: &mut R) -> (Option<([f64; 3], [f64; 3])>, bool) {
        let xi1 = match self.spec {
            WavepacketSpec::CubePair { lambda, .. } => {
                let mu = self.spec.mu();
                [
                    lambda + mu * (2.0 * rng.random::<f64>() - 1.0),
                    mu * (2.0 * rng.random::<f64>() - 1.0),
                    mu * (2.0 * rng.random::<f64>() - 1.0),
                ]
            }
            WavepacketSpec::Annulus { lambda } => {
                let u: f64 = rng.random();
                let r = lambda * (1.0 + 7.0 * u).cbrt();
                let e = Self::unit_vector(rng);
                [r * e[0], r * e[1], r * e[2]]
            }
        };
        let rho = self.radius * rng.random::<f64>();
        let e = Self::unit_vector(rng);
        let zeta = [rho * e[0], rho * e[1], rho * e[2]];
        if rho < SINGULAR_CUTOFF {
            return (None, true);
        }
        let xi2 = sub(zeta, xi1);
        let xi3 = sub(self.xi, zeta);
        let inside = match self.spec {
            WavepacketSpec::CubePair { lambda, .. } => {
                let mu = self.spec.mu();
                in_cube(xi2, [-lambda, 0.0, 0.0], mu) && in_cube(xi3, [lambda, 0.0, 0.0], mu)
            }
            WavepacketSpec::Annulus { lambda } => in_annulus(xi2, lambda) && in_annulus(xi3, lambda),
        };
        (if inside { Some((xi1, xi2)) } else { None }, false)
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: Complex64,
    sum_sq: f64,
    accepted: usize,
    singular: usize,
}

/// `F_t(ξ)` by importance sampling; shards use independent ChaCha streams
/// and are reduced in shard order, so the result does not depend on the
/// number of workers.
pub fn f_t_monte_carlo(
    spec: &WavepacketSpec,
    t: f64,
    xi: [f64; 3],
    m: f64,
    n_samples: usize,
    seed: u64,
) -> Result<TrilinearResult> {
    spec.validate()?;
    if n_samples < 10_000 {
        return Err(LabError::InvalidParameter(format!("n_samples must be >= 1e4, got {n_samples}")));
    }
    if !(t.is_finite() && m.is_finite() && m >= 0.0) {
        return Err(LabError::InvalidParameter("t must be finite and m >= 0".into()));
    }
    let sampler = Sampler::new(spec, xi)?;
    let phi_xi = phi_m(xi, m);
    let n_shards = n_samples.div_ceil(SHARD);
    let shards: Vec<Moments> = (0..n_shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = SHARD.min(n_samples - k * SHARD);
            let mut mo = Moments::default();
            for _ in 0..count {
                match sampler.draw(&mut rng) {
                    (Some((xi1, xi2)), _) => {
                        let xi3 = sub(sub(xi, xi1), xi2);
                        let r = phi_m(xi1, m) - phi_m(xi2, m) + phi_m(xi3, m) - phi_xi;
                        let w = duhamel_weight(t, r);
                        mo.sum += w;
                        mo.sum_sq += w.norm_sqr();
                        mo.accepted += 1;
                    }
                    (None, singular) => mo.singular += singular as usize,
                }
            }
            mo
        })
        .collect();
    let total = shards.iter().fold(Moments::default(), |a, b| Moments {
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
        accepted: a.accepted + b.accepted,
        singular: a.singular + b.singular,
    });
    let n = n_samples as f64;
    let mean = total.sum / n;
    let var = (total.sum_sq / n - mean.norm_sqr()).max(0.0) * n / (n - 1.0);
    let scale = TRILINEAR_CONSTANT * sampler.scale;
    let phase = Complex64::from_polar(1.0, t * phi_xi);
    Ok(TrilinearResult {
        xi,
        value: phase * mean * scale,
        stderr: scale * (var / n).sqrt(),
        n_samples,
        seed,
        acceptance: total.accepted as f64 / n,
        rejected_singular: total.singular,
    })
}

/// Plain uniform sampling of `(ξ₁, ξ₂)` over the bounding product of the
/// supports — the reference estimator (its variance is infinite because of
/// the `|ξ₁+ξ₂|⁻²` weight, so the reported stderr is unreliable).
pub fn f_t_uniform_reference(
    spec: &WavepacketSpec,
    t: f64,
    xi: [f64; 3],
    m: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Complex64> {
    let WavepacketSpec::CubePair { lambda, .. } = *spec else {
        return Err(LabError::InvalidParameter("uniform reference implemented for cube pairs".into()));
    };
    let mu = spec.mu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Complex64::default();
    let mut u = |c: f64| c + mu * (2.0 * rng.random::<f64>() - 1.0);
    for _ in 0..n_samples {
        let xi1 = [u(lambda), u(0.0), u(0.0)];
        let xi2 = [u(-lambda), u(0.0), u(0.0)];
        let xi3 = sub(sub(xi, xi1), xi2);
        let z = norm([xi1[0] + xi2[0], xi1[1] + xi2[1], xi1[2] + xi2[2]]);
        if z < SINGULAR_CUTOFF || !in_cube(xi3, [lambda, 0.0, 0.0], mu) {
            continue;
        }
        let r = resonance(xi1, xi2, xi, m);
        acc += duhamel_weight(t, r) / (z * z);
    }
    let vol = (2.0 * mu).powi(6);
    Ok(Complex64::from_polar(1.0, t * phi_m(xi, m)) * acc * (TRILINEAR_CONSTANT * vol / n_samples as f64))
}
