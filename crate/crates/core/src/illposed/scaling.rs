//! Norm-ratio scaling of the cubic term against `‖φ‖³_{H^s}` as `λ` grows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::trilinear::{f_t_monte_carlo, TrilinearResult};
use super::wavepacket::WavepacketSpec;
use crate::error::{LabError, Result};
use crate::report::{loglog_slope, ExperimentReport};

/// Stderr/|value| above which a point is rejected.
pub const MAX_RELATIVE_STDERR: f64 = 0.05;
pub const POINTS_PER_REGION: usize = 8;

/// Sampled output frequencies: the octant centres of `¼W_λ^+` (cube of
/// half-side `μ/4` at `λe₁`), or for the annulus eight points with
/// `5λ/4 ≤ |ξ| ≤ 3λ/2` — the first two share a modulus.
pub fn sample_points(spec: &WavepacketSpec) -> Vec<[f64; 3]> {
    match *spec {
        WavepacketSpec::CubePair { lambda, .. } => {
            let h = spec.mu() / 8.0;
            let mut pts = Vec::with_capacity(8);
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        pts.push([lambda + sx * h, sy * h, sz * h]);
                    }
                }
            }
            pts
        }
        WavepacketSpec::Annulus { lambda } => {
            // golden-angle directions
            let ga = PI * (3.0 - 5f64.sqrt());
            (0..POINTS_PER_REGION)
                .map(|i| {
                    let k = if i == 0 { 0 } else { i - 1 };
                    let r = lambda * (1.25 + 0.25 * (k as f64 + 0.5) / (POINTS_PER_REGION - 1) as f64);
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / POINTS_PER_REGION as f64;
                    let s = (1.0 - z * z).sqrt();
                    let th = ga * i as f64;
                    [r * s * th.cos(), r * s * th.sin(), r * z]
                })
                .collect()
        }
    }
}

/// Volume of the output region the sample points represent.
pub fn region_volume(spec: &WavepacketSpec) -> f64 {
    match *spec {
        WavepacketSpec::CubePair { .. } => (spec.mu() / 2.0).powi(3),
        WavepacketSpec::Annulus { lambda } => 4.0 * PI / 3.0 * ((1.5 * lambda).powi(3) - (1.25 * lambda).powi(3)),
    }
}

/// Distinct, reproducible seed for sample `(i, j)` of a sweep.
pub fn derive_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut z = seed ^ ((i as u64) << 32 | j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `F_t` at the sample points for one `λ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub spec: WavepacketSpec,
    pub t: f64,
    pub values: Vec<TrilinearResult>,
}

/// Frequency table shared by every `s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingTable {
    pub name: String,
    pub m: f64,
    pub rows: Vec<ScalingRow>,
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.len() < 4 {
        return Err(LabError::InvalidParameter("slope fits need at least 4 lambda values".into()));
    }
    let q = lambdas[1] / lambdas[0];
    let geometric = q > 1.0
        && lambdas
            .windows(2)
            .all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(LabError::InvalidParameter("lambda list must be increasing geometric".into()));
    }
    Ok(())
}

fn build_table(
    name: &str,
    specs: Vec<(WavepacketSpec, f64)>,
    m: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ScalingTable> {
    let mut rows = Vec::with_capacity(specs.len());
    for (i, (spec, t)) in specs.into_iter().enumerate() {
        let values = sample_points(&spec)
            .into_iter()
            .enumerate()
            .map(|(j, xi)| f_t_monte_carlo(&spec, t, xi, m, n_samples, derive_seed(seed, i, j)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(bad) = values.iter().find(|v| !(v.relative_stderr() <= MAX_RELATIVE_STDERR)) {
            return Err(LabError::McPrecision(format!(
                "lambda = {}: stderr/|F| = {:.3} at xi = {:?} exceeds {MAX_RELATIVE_STDERR}",
                spec.lambda(),
                bad.relative_stderr(),
                bad.xi
            )));
        }
        rows.push(ScalingRow { spec, t, values });
    }
    Ok(ScalingTable {
        name: name.to_string(),
        m,
        rows,
    })
}

pub fn c3_table(lambdas: &[f64], t: f64, delta: f64, m: f64, n_samples: usize, seed: u64) -> Result<ScalingTable> {
    check_lambdas(lambdas)?;
    let specs = lambdas
        .iter()
        .map(|&l| Ok((WavepacketSpec::cube_pair(l, delta)?, t)))
        .collect::<Result<Vec<_>>>()?;
    build_table("c3_scaling", specs, m, n_samples, seed)
}

/// Annulus table with `t = δ/λ`.
pub fn radial_table(lambdas: &[f64], delta: f64, m: f64, n_samples: usize, seed: u64) -> Result<ScalingTable> {
    check_lambdas(lambdas)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let specs = lambdas
        .iter()
        .map(|&l| Ok((WavepacketSpec::annulus(l)?, delta / l)))
        .collect::<Result<Vec<_>>>()?;
    build_table("radial_scaling", specs, m, n_samples, seed)
}

/// `ρ(λ) = ‖⟨ξ⟩^s F_t‖_{L²(region)} / ‖φ‖³_{H^s}` per row and its log–log slope.
pub fn ratio_report(table: &ScalingTable, s: f64, expected_slope: f64) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        &table.name,
        &["lambda", "t", "value", "stderr", "ratio"],
    );
    let mut lam = Vec::new();
    let mut ratio = Vec::new();
    let mut sigma = Vec::new();
    for row in &table.rows {
        let vol = region_volume(&row.spec);
        let mut num = 0.0;
        let mut var = 0.0;
        let mut fsum = 0.0;
        let mut fvar = 0.0;
        for v in &row.values {
            let x = v.xi;
            let w = (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(s);
            let a = v.modulus();
            num += w * a * a;
            var += (2.0 * w * a * v.stderr).powi(2);
            fsum += a;
            fvar += v.stderr * v.stderr;
        }
        let k = row.values.len() as f64;
        let proxy = (vol * num / k).sqrt();
        let phi = row.spec.sobolev_norm(s);
        let rho = proxy / phi.powi(3);
        // δ(log proxy) = ½ δnum / num
        let s_log = 0.5 * var.sqrt() / num;
        lam.push(row.spec.lambda());
        ratio.push(rho);
        sigma.push(s_log);
        rep.push_row(vec![row.spec.lambda(), row.t, fsum / k, fvar.sqrt() / k, rho]);
    }
    let (slope, ci) = loglog_slope(&lam, &ratio, &sigma)?;
    rep.fitted_slope = Some(slope);
    rep.slope_ci = Some(ci);
    rep.expected_slope = Some(expected_slope);
    rep.set_config("s", s);
    rep.set_config("m", table.m);
    rep.set_config("points_per_lambda", POINTS_PER_REGION);
    if let Some(r) = table.rows.first() {
        rep.set_config("n_samples", r.values[0].n_samples);
        rep.set_config("seed_base", r.values[0].seed);
        match r.spec {
            WavepacketSpec::CubePair { delta, .. } => {
                rep.set_config("delta", delta);
                rep.set_config("t", r.t);
                rep.set_config("region", "cube of half-side mu/4 at lambda*e1, octant centres");
            }
            WavepacketSpec::Annulus { .. } => {
                rep.set_config("t", "delta/lambda");
                rep.set_config("region", "5*lambda/4 <= |xi| <= 3*lambda/2");
            }
        }
    }
    Ok(rep)
}

pub fn c3_scaling_experiment(
    lambdas: &[f64],
    s: f64,
    t: f64,
    delta: f64,
    m: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let table = c3_table(lambdas, t, delta, m, n_samples, seed)?;
    let mut rep = ratio_report(&table, s, 0.5 - 2.0 * s)?;
    rep.set_config("delta", delta);
    Ok(rep)
}

pub fn radial_scaling_experiment(
    lambdas: &[f64],
    s: f64,
    delta: f64,
    m: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let table = radial_table(lambdas, delta, m, n_samples, seed)?;
    let mut rep = ratio_report(&table, s, -2.0 * s)?;
    rep.set_config("delta", delta);
    Ok(rep)
}
