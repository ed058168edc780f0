use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spacetime::SpaceTimeField;
use crate::error::{LabError, Result};
use crate::illposed::phi_m;
use crate::spectral::{beta1, beta_lambda, Field, Grid3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XsbParams {
    pub s: f64,
    pub b: f64,
    #[serde(default = "default_b_prime")]
    pub b_prime: f64,
    /// Time-cutoff scale of `ψ_T(t) = β₁(t/T)`.
    #[serde(rename = "T", alias = "t_cutoff")]
    pub t_cutoff: f64,
    #[serde(default)]
    pub m: f64,
}

fn default_b_prime() -> f64 {
    -0.3
}

impl Default for XsbParams {
    fn default() -> Self {
        XsbParams {
            s: 0.0,
            b: 0.6,
            b_prime: -0.3,
            t_cutoff: 2.0,
            m: 0.0,
        }
    }
}

impl XsbParams {
    pub fn with_s(self, s: f64) -> Self {
        XsbParams { s, ..self }
    }

    pub fn with_b(self, b: f64) -> Self {
        XsbParams { b, ..self }
    }

    /// `−½ < b′ < 0 < ½ < b ≤ b′+1`.
    pub fn is_well_posed_regime(&self) -> bool {
        -0.5 < self.b_prime && self.b_prime < 0.0 && self.b > 0.5 && self.b <= self.b_prime + 1.0
    }
}

#[inline]
pub(crate) fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `(Σ⟨ξ⟩^{2s}⟨τ+|ξ|⟩^{2b}|Fu|² dξdτ)^{1/2}` with the massless weight.
pub fn xsb_norm(u: &SpaceTimeField, p: &XsbParams) -> f64 {
    xsb_norm_with(u, p.s, p.b)
}

pub fn xsb_norm_with(u: &SpaceTimeField, s: f64, b: f64) -> f64 {
    let spec = u.spectral();
    let g = *u.grid();
    let n = g.len();
    let xi: Vec<f64> = (0..n).map(|i| g.frequency_norm(i)).collect();
    let sw: Vec<f64> = xi.iter().map(|&k| bracket(k).powf(2.0 * s)).collect();
    let taus: Vec<f64> = (0..u.n_t()).map(|k| u.tau(k)).collect();
    let acc: f64 = spec
        .par_chunks(n)
        .zip(taus.par_iter())
        .map(|(c, &tau)| {
            c.iter()
                .zip(&xi)
                .zip(&sw)
                .map(|((v, &k), &w)| w * bracket(tau + k).powf(2.0 * b) * v.norm_sqr())
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    (acc * g.spectral_cell_volume() * u.dtau()).sqrt()
}

/// Fraction of `‖u‖²_{0,b}` carried by `|τ+|ξ|| ≤ width`.
pub fn modulation_fraction(u: &SpaceTimeField, b: f64, width: f64) -> f64 {
    let spec = u.spectral();
    let g = *u.grid();
    let n = g.len();
    let (mut inside, mut total) = (0.0, 0.0);
    for (k, c) in spec.chunks(n).enumerate() {
        let tau = u.tau(k);
        for (i, v) in c.iter().enumerate() {
            let d = tau + g.frequency_norm(i);
            let w = bracket(d).powf(2.0 * b) * v.norm_sqr();
            total += w;
            if d.abs() <= width {
                inside += w;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        inside / total
    }
}

/// Sharp ball projector `P_{B_μ(c)}`.
pub fn project_ball(u: &SpaceTimeField, center: [f64; 3], radius: f64) -> SpaceTimeField {
    u.apply_spatial_symbol(|k| {
        let d = [k[0] - center[0], k[1] - center[1], k[2] - center[2]];
        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= radius * radius {
            1.0
        } else {
            0.0
        }
    })
}

/// Smooth dyadic projector `P_μ` (`P_1` is the low-frequency piece).
pub fn project_dyadic(u: &SpaceTimeField, mu: f64) -> SpaceTimeField {
    u.apply_spatial_symbol(|k| beta_lambda(mu, (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()))
}

/// `‖P_{B_μ(c)}u‖_{L⁴} / (μ^{1/4}‖u‖_{1/4,b})`; zero for `u = 0`.
pub fn strichartz_ratio(u: &SpaceTimeField, mu: f64, p: &XsbParams) -> Result<f64> {
    strichartz_ratio_at(u, mu, [0.0; 3], p)
}

pub fn strichartz_ratio_at(u: &SpaceTimeField, mu: f64, center: [f64; 3], p: &XsbParams) -> Result<f64> {
    Ok(strichartz_parts(u, mu, center, p)?.map_or(0.0, |(num, den)| num / (mu.powf(0.25) * den)))
}

/// `(‖P_{B_μ(c)}u‖_{L⁴}, ‖u‖_{1/4,b})`, or `None` for `u = 0`.
pub fn strichartz_parts(u: &SpaceTimeField, mu: f64, center: [f64; 3], p: &XsbParams) -> Result<Option<(f64, f64)>> {
    if !(p.b > 0.5) {
        return Err(LabError::InvalidParameter(format!("Strichartz probe needs b > 1/2, got {}", p.b)));
    }
    if !(mu > 0.0) {
        return Err(LabError::InvalidParameter(format!("ball radius must be positive, got {mu}")));
    }
    let den = xsb_norm_with(u, 0.25, p.b);
    if den == 0.0 {
        if u.values().iter().all(|v| *v == Complex64::default()) {
            return Ok(None);
        }
        return Err(LabError::InvalidParameter("zero denominator".into()));
    }
    Ok(Some((project_ball(u, center, mu).l4_norm(), den)))
}

/// Which factors enter conjugated: `ũ_j ∈ {u_j, ū_j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Conjugation {
    pub first: bool,
    pub second: bool,
}

fn tilde(u: &SpaceTimeField, c: bool) -> SpaceTimeField {
    if c {
        u.conj()
    } else {
        u.clone()
    }
}

/// General form `‖P_μ(ũ₁ũ₂)‖_{L²} / (μ^{1/2}‖u₁‖_{1/4,b}‖u₂‖_{1/4,b})`, or for
/// `radial` `‖P_μ(P_λũ₁P_λũ₂)‖_{L²} / (μ‖u₁‖_{0,b}‖u₂‖_{0,b})`.
pub fn bilinear_ratio(
    u1: &SpaceTimeField,
    u2: &SpaceTimeField,
    mu: f64,
    lambda: f64,
    p: &XsbParams,
    radial: bool,
    conj: Conjugation,
) -> Result<f64> {
    let parts = bilinear_parts(u1, u2, mu, lambda, p, radial, conj)?;
    Ok(if parts.1 == 0.0 { 0.0 } else { parts.0 / parts.1 })
}

/// `(numerator, normalization)` of [`bilinear_ratio`].
pub fn bilinear_parts(
    u1: &SpaceTimeField,
    u2: &SpaceTimeField,
    mu: f64,
    lambda: f64,
    p: &XsbParams,
    radial: bool,
    conj: Conjugation,
) -> Result<(f64, f64)> {
    if !(p.b > 0.5) {
        return Err(LabError::InvalidParameter(format!("bilinear probe needs b > 1/2, got {}", p.b)));
    }
    if !(mu > 0.0) {
        return Err(LabError::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    if radial {
        if lambda < mu {
            return Err(LabError::InvalidParameter(format!("radial form needs lambda >= mu ({lambda} < {mu})")));
        }
        if !(u1.is_spatially_radial(1e-10) && u2.is_spatially_radial(1e-10)) {
            return Err(LabError::InvalidParameter("radial flag set but input is not radial".into()));
        }
        let a = tilde(&project_dyadic(u1, lambda), conj.first);
        let b = tilde(&project_dyadic(u2, lambda), conj.second);
        let num = project_dyadic(&a.mul(&b)?, mu).l2_norm();
        let den = mu * xsb_norm_with(u1, 0.0, p.b) * xsb_norm_with(u2, 0.0, p.b);
        Ok((num, den))
    } else {
        let prod = tilde(u1, conj.first).mul(&tilde(u2, conj.second))?;
        let num = project_dyadic(&prod, mu).l2_norm();
        let den = mu.sqrt() * xsb_norm_with(u1, 0.25, p.b) * xsb_norm_with(u2, 0.25, p.b);
        Ok((num, den))
    }
}

/// Frequency profile of generated samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Concentration {
    /// Free waves whose spectrum is a random affine function on `|ξ| ≤ radius`.
    Cone { radius: f64 },
    /// Same on the cube `|ξ − λe₁|∞ ≤ λ/4`.
    Cube { lambda: f64 },
    /// Radial free waves with a random radial profile on `λ ≤ |ξ| ≤ 2λ`.
    Annulus { lambda: f64 },
    /// Band-limited space-time noise (no cone structure, no cutoff).
    Random,
}

const RADIAL_MODES: usize = 6;

/// `g₀ + g·y` with complex Gaussian coefficients: smooth in `ξ`, so the
/// samples stay coherent (spatially concentrated) at every scale.
fn random_affine(rng: &mut ChaCha8Rng) -> impl Fn([f64; 3]) -> Complex64 {
    let c: [Complex64; 4] = std::array::from_fn(|_| gaussian(rng));
    move |y| c[0] + c[1] * y[0] + c[2] * y[1] + c[3] * y[2]
}

pub(crate) fn annulus_coefficients(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..RADIAL_MODES).map(|_| gaussian(rng)).collect()
}

/// Sine modes in `|ξ|` on `[λ, 2λ]`, vanishing on both edges.
pub(crate) fn annulus_profile(coef: &[Complex64], lambda: f64, r: f64) -> Complex64 {
    if r < lambda || r > 2.0 * lambda {
        return Complex64::default();
    }
    let x = (r - lambda) / lambda;
    coef.iter()
        .enumerate()
        .map(|(j, c)| c * (std::f64::consts::PI * (j + 1) as f64 * x).sin())
        .sum()
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Deterministic test function: `ψ_T(t)·U(t)φ` for random `φ` with the
/// prescribed spectrum (or noise for `Random`).
pub fn sample_xsb_function(
    seed: u64,
    concentration: Concentration,
    grid: Grid3,
    n_t: usize,
    t_cutoff: f64,
    m: f64,
) -> Result<SpaceTimeField> {
    if !(t_cutoff > 0.0) {
        return Err(LabError::InvalidParameter(format!("T must be positive, got {t_cutoff}")));
    }
    // ψ_T is supported in |t| < 2T
    let t_period = 4.0 * t_cutoff;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid;
    let kmax_space = 2.0 / 3.0 * g.nyquist();
    let phi_hat: Vec<Complex64> = match concentration {
        Concentration::Cone { radius } => {
            check_band(radius, kmax_space)?;
            let poly = random_affine(&mut rng);
            (0..g.len())
                .map(|i| {
                    let k = g.frequency(i);
                    if g.frequency_norm(i) <= radius {
                        poly([k[0] / radius, k[1] / radius, k[2] / radius])
                    } else {
                        Complex64::default()
                    }
                })
                .collect()
        }
        Concentration::Cube { lambda } => {
            let h = lambda / 4.0;
            check_band(lambda + h, kmax_space)?;
            let poly = random_affine(&mut rng);
            (0..g.len())
                .map(|i| {
                    let k = g.frequency(i);
                    let y = [(k[0] - lambda) / h, k[1] / h, k[2] / h];
                    if y.iter().all(|c| c.abs() <= 1.0) {
                        poly(y)
                    } else {
                        Complex64::default()
                    }
                })
                .collect()
        }
        Concentration::Annulus { lambda } => {
            check_band(2.0 * lambda, kmax_space)?;
            let coef = annulus_coefficients(&mut rng);
            (0..g.len())
                .map(|i| {
                    let r = g.frequency_norm(i);
                    annulus_profile(&coef, lambda, r)
                })
                .collect()
        }
        Concentration::Random => {
            let u = SpaceTimeField::zeros(grid, n_t, t_period)?;
            let mut data: Vec<Complex64> = (0..u.values().len()).map(|_| gaussian(&mut rng)).collect();
            // keep |ξ| ≤ 2/3 Nyquist and |τ| ≤ 2/3 of the time Nyquist
            let n = g.len();
            let tn = u.time_nyquist();
            for (k, c) in data.chunks_mut(n).enumerate() {
                let tau = u.tau(k).abs();
                for (i, v) in c.iter_mut().enumerate() {
                    if g.frequency_norm(i) > kmax_space || tau > 2.0 / 3.0 * tn {
                        *v = Complex64::default();
                    }
                }
            }
            return SpaceTimeField::from_spectral(grid, n_t, t_period, data);
        }
    };
    let omega: Vec<f64> = (0..g.len()).map(|i| phi_m(g.frequency(i), m)).collect();
    let probe = SpaceTimeField::zeros(grid, n_t, t_period)?;
    let tmax = (0..g.len())
        .filter(|&i| phi_hat[i] != Complex64::default())
        .map(|i| omega[i].abs())
        .fold(0.0, f64::max);
    if tmax + 4.0 * probe.dtau() >= probe.time_nyquist() {
        return Err(LabError::InvalidGrid(format!(
            "time Nyquist {:.3} too small for |phi_m| up to {tmax:.3}; increase n_t",
            probe.time_nyquist()
        )));
    }
    let base = Field::from_values(g, phi_hat, crate::spectral::Representation::Spectral)?;
    SpaceTimeField::from_slices(grid, n_t, t_period, |t| {
        let cut = beta1(t / t_cutoff);
        if cut == 0.0 {
            return vec![Complex64::default(); g.len()];
        }
        let vals: Vec<Complex64> = base
            .values()
            .iter()
            .zip(&omega)
            .map(|(v, w)| v * Complex64::from_polar(cut, t * w))
            .collect();
        Field::from_values(g, vals, crate::spectral::Representation::Spectral)
            .expect("length")
            .to_physical()
            .into_values()
    })
}

fn check_band(extent: f64, limit: f64) -> Result<()> {
    if extent > limit {
        return Err(LabError::InvalidGrid(format!(
            "sample spectrum reaches {extent:.3} beyond 2/3 of the spatial Nyquist ({limit:.3})"
        )));
    }
    Ok(())
}
