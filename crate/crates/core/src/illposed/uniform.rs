//! Decoherence of two soliton families: `I(τ) = ‖u_{μ₁}(τ) − u_{μ₂}(τ)‖²`
//! with `u_μ(τ) = e^{iτμ}Q_μ`, which expands to
//! `‖Q_{μ₁}‖² + ‖Q_{μ₂}‖² − 2cos(τ(μ₁−μ₂))⟨Q_{μ₁}, Q_{μ₂}⟩`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::groundstate::{default_initial_guess, petviashvili_solve, GroundState};
use crate::report::ExperimentReport;
use crate::spectral::RadialGrid;

/// `⟨Q_{μ₁}, Q_{μ₂}⟩` with `Q_μ = μ^{3/2}R_μ(μ·)`:
/// `κ^{−3/2}∫R₁(y)R₂(y/κ)dy`, `κ = μ₁/μ₂`.
pub fn soliton_overlap(r1: &GroundState, mu1: f64, r2: &GroundState, mu2: f64) -> f64 {
    let kappa = mu1 / mu2;
    let g = *r1.profile.grid();
    let radii: Vec<f64> = g.radii().iter().map(|r| r / kappa).collect();
    let a = r1.profile.to_physical().real_parts();
    let b = r2.profile.interpolate(&radii);
    let w = g.weights();
    let s: f64 = (0..g.n_r()).map(|j| w[j] * a[j] * b[j].re).sum();
    kappa.powf(-1.5) * s
}

/// `μ₁(n) = (π/2t)(n+1)²`, `μ₂(n) = (π/2t)n²`.
pub fn mu_pair(t: f64, n: usize) -> (f64, f64) {
    let c = PI / (2.0 * t);
    (c * ((n + 1) * (n + 1)) as f64, c * (n * n) as f64)
}

/// One row per `n`: `(n, μ₁, μ₂, cos, overlap, I(0), I(t))`.
///
/// For `m = 0` a single massless `Q` is rescaled; for `m > 0` each `μ` uses
/// the member of mass parameter `m²/μ²`, so that `Q_μ` has mass `m`.
pub fn uniform_continuity_experiment(t: f64, n_list: &[usize], m: f64, grid: RadialGrid, tol: f64) -> Result<ExperimentReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LabError::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(LabError::InvalidParameter(format!("m must be >= 0, got {m}")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(LabError::InvalidParameter("n values must be >= 1".into()));
    }
    let init = default_initial_guess(grid);
    let mut mus: Vec<f64> = n_list
        .iter()
        .flat_map(|&n| {
            let (a, b) = mu_pair(t, n);
            [a, b]
        })
        .collect();
    mus.sort_by(f64::total_cmp);
    mus.dedup();

    let param = |mu: f64| m * m / (mu * mu);
    let solved: Vec<(f64, Result<GroundState>)> = if m == 0.0 {
        let q = petviashvili_solve(0.0, &init, tol)?;
        mus.iter().map(|&mu| (mu, Ok(q.clone()))).collect()
    } else {
        mus.par_iter()
            .map(|&mu| (mu, petviashvili_solve(param(mu), &init, tol)))
            .collect()
    };
    let offenders: Vec<String> = solved
        .iter()
        .filter_map(|(mu, r)| r.as_ref().err().map(|e| format!("mu={mu}: {e}")))
        .collect();
    if !offenders.is_empty() {
        return Err(LabError::NotConverged(offenders.join("; ")));
    }
    let member = |mu: f64| -> &GroundState {
        let i = mus.iter().position(|&x| x == mu).expect("solved");
        solved[i].1.as_ref().expect("checked")
    };

    let mut rep = ExperimentReport::new(
        "uniform_continuity",
        &["n", "mu1", "mu2", "cos", "overlap", "norm_sq_sum", "i0", "it"],
    );
    for &n in n_list {
        let (mu1, mu2) = mu_pair(t, n);
        let (g1, g2) = (member(mu1), member(mu2));
        let ov = soliton_overlap(g1, mu1, g2, mu2);
        let nsq = g1.l2_norm.powi(2) + g2.l2_norm.powi(2);
        // t(μ₁−μ₂) = (π/2)(2n+1): the cosine is zero up to rounding
        let c = (t * (mu1 - mu2)).cos();
        rep.push_row(vec![
            n as f64,
            mu1,
            mu2,
            c,
            ov,
            nsq,
            nsq - 2.0 * ov,
            nsq - 2.0 * c * ov,
        ]);
    }
    rep.set_config("t", t);
    rep.set_config("m", m);
    rep.set_config("r_max", grid.r_max());
    rep.set_config("n_r", grid.n_r());
    rep.set_config("tol", tol);
    if m == 0.0 {
        let q = member(mus[0]);
        rep.set_config("q_norm_sq", q.l2_norm.powi(2));
    }
    Ok(rep)
}
