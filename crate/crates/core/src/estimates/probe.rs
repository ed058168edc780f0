//! Seed sweeps: every "bounded across the sweep" statement is a
//! max over seeds, reported with the seed attaining it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::{radial_bilinear_sweep, sample_radial_annulus};
use super::xsb::{
    bilinear_parts, sample_xsb_function, strichartz_parts, xsb_norm_with, Concentration, Conjugation, XsbParams,
};
use crate::error::{LabError, Result};
use crate::illposed::derive_seed;
use crate::report::least_squares;
use crate::spectral::{Grid3, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// `‖P_{B_μ}u‖_{L⁴} / (μ^{1/4}‖u‖_{1/4,b})` on data in `B_μ(0)`.
    Str1,
    /// Same without the `μ^{1/4}`.
    Str1b,
    /// `‖u‖_{L⁴} / ‖u‖_{1/2,b}` on data in `B_μ(0)`.
    Str2,
    /// `‖P_μ(u₁ū₂)‖_{L²} / (μ^{1/2}‖u₁‖_{1/4,b}‖u₂‖_{1/4,b})`, data in `B_μ(0)`.
    BilStr,
    /// Radial annulus data at `λ` on the radial grid: both normalizations
    /// of `P_μ(P_λu₁ P_λū₂)`.
    BilRad,
}

impl ProbeKind {
    pub fn id(&self) -> &'static str {
        match self {
            ProbeKind::Str1 => "str1",
            ProbeKind::Str1b => "str1b",
            ProbeKind::Str2 => "str2",
            ProbeKind::BilStr => "bil-str",
            ProbeKind::BilRad => "bil-rad",
        }
    }

    /// Expected log–log slope of the per-`μ` maxima.
    pub fn expected_slope(&self) -> f64 {
        match self {
            ProbeKind::Str1b => 0.25,
            ProbeKind::BilRad => 0.5,
            _ => 0.0,
        }
    }
}

impl std::str::FromStr for ProbeKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "str1" => ProbeKind::Str1,
            "str1b" => ProbeKind::Str1b,
            "str2" => ProbeKind::Str2,
            "bil-str" => ProbeKind::BilStr,
            "bil-rad" => ProbeKind::BilRad,
            _ => return Err(LabError::InvalidParameter(format!("unknown probe '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub probe: ProbeKind,
    pub mus: Vec<f64>,
    /// Annulus frequency for `bil-rad`; recorded only for the others.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    pub box_length: f64,
    #[serde(default = "default_n_t")]
    pub n_t: usize,
    #[serde(default)]
    pub params: XsbParams,
    /// Radial grid for `bil-rad`.
    #[serde(default = "default_n_r")]
    pub n_r: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

fn default_lambda() -> f64 {
    8.0
}
fn default_seeds() -> usize {
    100
}
fn default_n() -> usize {
    16
}
fn default_n_t() -> usize {
    32
}
fn default_n_r() -> usize {
    512
}
fn default_r_max() -> f64 {
    16.0
}

impl ProbeConfig {
    /// Desk-scale defaults for each probe.
    pub fn preset(probe: ProbeKind) -> Self {
        let base = ProbeConfig {
            probe,
            mus: vec![1.0, 2.0, 4.0],
            lambda: 8.0,
            seeds: 100,
            seed: 0,
            n: 16,
            box_length: 8.0,
            n_t: 32,
            params: XsbParams::default(),
            n_r: 512,
            r_max: 16.0,
        };
        match probe {
            // dyadic μ ≪ λ; P_1 is the low-pass piece and has a different window
            ProbeKind::BilRad => ProbeConfig {
                mus: vec![2.0, 4.0, 8.0],
                lambda: 128.0,
                n_t: 384,
                n_r: 2048,
                params: XsbParams {
                    t_cutoff: 1.0,
                    ..base.params
                },
                ..base
            },
            _ => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.params.b > 0.5) {
            return Err(LabError::InvalidParameter(format!(
                "estimates probes need b > 1/2, got {}",
                self.params.b
            )));
        }
        if self.seeds == 0 {
            return Err(LabError::InvalidParameter("seeds must be >= 1".into()));
        }
        if self.mus.is_empty() || self.mus.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(LabError::InvalidParameter("mu values must be positive".into()));
        }
        if self.probe == ProbeKind::BilRad && self.mus.iter().any(|&m| m > self.lambda) {
            return Err(LabError::InvalidParameter(format!(
                "radial form needs lambda >= mu (lambda = {})",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub estimate_id: String,
    pub mu: f64,
    pub lambda: f64,
    pub seed: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMax {
    pub estimate_id: String,
    pub mu: f64,
    pub max_ratio: f64,
    pub argmax_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub config: ProbeConfig,
    pub rows: Vec<ProbeRow>,
    pub maxima: Vec<ProbeMax>,
}

impl ProbeResult {
    pub fn maxima_for(&self, id: &str) -> Vec<ProbeMax> {
        self.maxima.iter().filter(|m| m.estimate_id == id).cloned().collect()
    }

    /// `max/min` of the per-`μ` maxima.
    pub fn spread(&self, id: &str) -> f64 {
        let v: Vec<f64> = self.maxima_for(id).iter().map(|m| m.max_ratio).collect();
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// Least-squares slope of log(max ratio) against log μ.
    pub fn slope(&self, id: &str) -> Result<f64> {
        let m = self.maxima_for(id);
        let x: Vec<f64> = m.iter().map(|r| r.mu.ln()).collect();
        let y: Vec<f64> = m.iter().map(|r| r.max_ratio.ln()).collect();
        Ok(least_squares(&x, &y)?.slope)
    }
}

/// Ids produced by a probe (`bil-rad` reports both normalizations).
pub fn estimate_ids(probe: ProbeKind) -> &'static [&'static str] {
    match probe {
        ProbeKind::BilRad => &["bil-rad", "bil-rad-general"],
        ProbeKind::Str1 => &["str1"],
        ProbeKind::Str1b => &["str1b"],
        ProbeKind::Str2 => &["str2"],
        ProbeKind::BilStr => &["bil-str"],
    }
}

fn sample(cfg: &ProbeConfig, grid: Option<Grid3>, seed: u64, conc: Concentration) -> Result<super::SpaceTimeField> {
    let grid = grid.ok_or_else(|| LabError::InvalidGrid("no spatial grid".into()))?;
    sample_xsb_function(seed, conc, grid, cfg.n_t, cfg.params.t_cutoff, cfg.params.m)
}

/// Ratios for one `(μ, seed index)`; one entry per estimate id.
fn evaluate(cfg: &ProbeConfig, grid: Option<Grid3>, mu_index: usize, k: usize) -> Result<Vec<(u64, f64)>> {
    let mu = cfg.mus[mu_index];
    let p = &cfg.params;
    let s1 = derive_seed(cfg.seed, mu_index, 2 * k);
    match cfg.probe {
        ProbeKind::Str1 | ProbeKind::Str1b => {
            let u = sample(cfg, grid, s1, Concentration::Cone { radius: mu })?;
            let r = strichartz_parts(&u, mu, [0.0; 3], p)?.map_or(0.0, |(num, den)| {
                if cfg.probe == ProbeKind::Str1 {
                    num / (mu.powf(0.25) * den)
                } else {
                    num / den
                }
            });
            Ok(vec![(s1, r)])
        }
        ProbeKind::Str2 => {
            let u = sample(cfg, grid, s1, Concentration::Cone { radius: mu })?;
            let den = xsb_norm_with(&u, 0.5, p.b);
            Ok(vec![(s1, if den == 0.0 { 0.0 } else { u.l4_norm() / den })])
        }
        ProbeKind::BilStr => {
            let s2 = derive_seed(cfg.seed, mu_index, 2 * k + 1);
            let u1 = sample(cfg, grid, s1, Concentration::Cone { radius: mu })?;
            let u2 = sample(cfg, grid, s2, Concentration::Cone { radius: mu })?;
            let (num, den) = bilinear_parts(&u1, &u2, mu, cfg.lambda.max(mu), p, false, conj_second())?;
            Ok(vec![(s1, num / den)])
        }
        ProbeKind::BilRad => evaluate_radial(cfg, k).map(|mut v| v.swap_remove(mu_index)),
    }
}

/// One radial pair, shared by every `μ`: `[μ][(radial, general)]`.
fn evaluate_radial(cfg: &ProbeConfig, k: usize) -> Result<Vec<Vec<(u64, f64)>>> {
    let p = &cfg.params;
    let s1 = derive_seed(cfg.seed, 0, 2 * k);
    let s2 = derive_seed(cfg.seed, 0, 2 * k + 1);
    let g = RadialGrid::new(cfg.r_max, cfg.n_r)?;
    let u1 = sample_radial_annulus(s1, cfg.lambda, g, cfg.n_t, p.t_cutoff, p.m)?;
    let u2 = sample_radial_annulus(s2, cfg.lambda, g, cfg.n_t, p.t_cutoff, p.m)?;
    Ok(radial_bilinear_sweep(&u1, &u2, &cfg.mus, cfg.lambda, p.b, conj_second())?
        .into_iter()
        .map(|(num, radial, general)| vec![(s1, num / radial), (s1, num / general)])
        .collect())
}

fn conj_second() -> Conjugation {
    Conjugation {
        first: false,
        second: true,
    }
}

/// Run a sweep: parallel over `(μ, seed)`, reduced in index order.
pub fn run_probe(cfg: &ProbeConfig) -> Result<ProbeResult> {
    cfg.validate()?;
    // the radial probe never touches the 3D box
    let grid = if cfg.probe == ProbeKind::BilRad {
        None
    } else {
        Some(Grid3::new(cfg.n, cfg.box_length)?)
    };
    // table[i][k]: ratios for μ_i and seed index k
    let table: Vec<Vec<Vec<(u64, f64)>>> = if cfg.probe == ProbeKind::BilRad {
        let per_seed = (0..cfg.seeds)
            .into_par_iter()
            .map(|k| evaluate_radial(cfg, k))
            .collect::<Result<Vec<_>>>()?;
        (0..cfg.mus.len())
            .map(|i| per_seed.iter().map(|v| v[i].clone()).collect())
            .collect()
    } else {
        let jobs: Vec<(usize, usize)> = (0..cfg.mus.len())
            .flat_map(|i| (0..cfg.seeds).map(move |k| (i, k)))
            .collect();
        let flat = jobs
            .par_iter()
            .map(|&(i, k)| evaluate(cfg, grid, i, k))
            .collect::<Result<Vec<_>>>()?;
        flat.chunks(cfg.seeds).map(|c| c.to_vec()).collect()
    };

    let ids = estimate_ids(cfg.probe);
    let mut rows = Vec::with_capacity(cfg.mus.len() * cfg.seeds * ids.len());
    let mut maxima = Vec::new();
    for (e, &id) in ids.iter().enumerate() {
        for (i, &mu) in cfg.mus.iter().enumerate() {
            let mut best: Option<ProbeMax> = None;
            for v in &table[i] {
                let (seed, ratio) = v[e];
                rows.push(ProbeRow {
                    estimate_id: id.to_string(),
                    mu,
                    lambda: cfg.lambda,
                    seed,
                    ratio,
                });
                // strict > keeps the first seed on ties
                if best.as_ref().is_none_or(|b| ratio > b.max_ratio) {
                    best = Some(ProbeMax {
                        estimate_id: id.to_string(),
                        mu,
                        max_ratio: ratio,
                        argmax_seed: seed,
                    });
                }
            }
            maxima.extend(best);
        }
    }
    Ok(ProbeResult {
        config: cfg.clone(),
        rows,
        maxima,
    })
}
