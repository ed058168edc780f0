use num_complex::Complex64;
use rayon::prelude::*;

use super::solver::{default_initial_guess, ground_state_profile, petviashvili_solve, GroundState, Operators};
use crate::error::{LabError, Result};
use crate::evolution::{evolve_observed, EvolutionConfig, Gauge, Sign};
use crate::report::{least_squares, ExperimentReport};
use crate::spectral::radial::apply_radial_symbol;
use crate::spectral::{CoulombBackend, RadialProfile};

/// `∫R√(−Δ)R / ∫(|x|⁻¹∗R²)R²`; one half for a massless ground state.
pub fn pohozaev_ratio(g: &GroundState) -> f64 {
    profile_pohozaev_ratio(&g.profile)
}

pub fn profile_pohozaev_ratio(p: &RadialProfile) -> f64 {
    let ops = Operators::new(*p.grid(), 0.0);
    let u = p.to_physical().real_parts();
    let du = apply_radial_symbol(p, |k| Complex64::new(k, 0.0)).real_parts();
    ops.inner(&du, &u) / ops.v_functional(&u)
}

/// Both sides of `∫(|x|⁻¹∗Q²)Q² = (2/‖Q‖²)(∫Q√(−Δ)Q)(∫Q²)`.
pub fn optimal_constant_sides(g: &GroundState) -> (f64, f64) {
    let ops = Operators::new(*g.profile.grid(), 0.0);
    let u = ground_state_profile(g);
    let du = apply_radial_symbol(&g.profile, |k| Complex64::new(k, 0.0)).real_parts();
    let m = ops.inner(&u, &u);
    (ops.v_functional(&u), 2.0 / m * ops.inner(&du, &u) * m)
}

/// `V = |x|⁻¹∗R²` on the grid.
pub fn newton_potential(g: &GroundState) -> Vec<f64> {
    Operators::new(*g.profile.grid(), g.mass_param).potential(&ground_state_profile(g))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    /// Difference of the slopes fitted on the two halves of the window
    /// (in log r); large values mean the tail is not a power law.
    pub curvature: f64,
    pub power_law: bool,
}

/// Least-squares slope of `log R` against `log r` over `r₁ ≤ r ≤ r₂`.
pub fn decay_exponent_fit(g: &GroundState, window: (f64, f64)) -> Result<f64> {
    Ok(decay_fit(&g.profile, window)?.slope)
}

pub fn decay_fit(p: &RadialProfile, (r1, r2): (f64, f64)) -> Result<DecayFit> {
    let grid = *p.grid();
    if !(r1 > 0.0 && r2 > r1) {
        return Err(LabError::InvalidParameter(format!("bad window [{r1}, {r2}]")));
    }
    if r2 > grid.r_max() / 2.0 {
        return Err(LabError::InvalidParameter(format!(
            "window end {r2} exceeds r_max/2 = {}",
            grid.r_max() / 2.0
        )));
    }
    let v = p.to_physical().real_parts();
    let pts: Vec<(f64, f64)> = (0..grid.n_r())
        .map(|j| (grid.r(j), v[j]))
        .filter(|(r, _)| *r >= r1 && *r <= r2)
        .collect();
    if pts.len() < 4 {
        return Err(LabError::InvalidParameter("window holds fewer than 4 grid points".into()));
    }
    if let Some((r, x)) = pts.iter().find(|(_, x)| !(*x > 0.0)) {
        return Err(LabError::InvalidParameter(format!(
            "profile non-positive in window (R({r}) = {x:e})"
        )));
    }
    let fit = |pts: &[(f64, f64)]| -> Result<f64> {
        let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        Ok(least_squares(&lx, &ly)?.slope)
    };
    let slope = fit(&pts)?;
    let mid = (r1 * r2).sqrt();
    let (lo, hi): (Vec<_>, Vec<_>) = pts.iter().partition(|p| p.0 < mid);
    let curvature = (fit(&hi)? - fit(&lo)?).abs();
    Ok(DecayFit {
        slope,
        curvature,
        power_law: curvature < 0.25,
    })
}

/// Solve each member of the `R_μ` family and the massless `Q` from the same
/// initial guess and tabulate `‖R_μ − Q‖`, `‖R_μ‖²` and `‖Q‖²`.
pub fn family_limit_check(mass_params: &[f64], init: &RadialProfile, tol: f64) -> Result<ExperimentReport> {
    if mass_params.len() < 3 {
        return Err(LabError::InvalidParameter("family check needs at least 3 members".into()));
    }
    if mass_params.windows(2).any(|w| w[1] >= w[0]) || mass_params.iter().any(|&a| !(a > 0.0)) {
        return Err(LabError::InvalidParameter(
            "mass_params must be positive and strictly decreasing".into(),
        ));
    }
    let mut all = vec![0.0];
    all.extend_from_slice(mass_params);
    let solved: Vec<(f64, Result<GroundState>)> = all
        .par_iter()
        .map(|&a| (a, petviashvili_solve(a, init, tol)))
        .collect();
    let offenders: Vec<String> = solved
        .iter()
        .filter_map(|(a, r)| r.as_ref().err().map(|e| format!("mass_param={a}: {e}")))
        .collect();
    if !offenders.is_empty() {
        return Err(LabError::NotConverged(offenders.join("; ")));
    }
    let mut members = solved.into_iter().map(|(_, r)| r.expect("checked"));
    let q = members.next().expect("massless member");
    let q_norm_sq = q.l2_norm * q.l2_norm;
    let mut rep = ExperimentReport::new(
        "family_limit",
        &["mass_param", "dist_to_q", "rel_dist", "r_norm_sq", "q_norm_sq", "residual"],
    );
    let mut dists = Vec::new();
    for g in members {
        let d = g.profile.sub(&q.profile).l2_norm();
        dists.push((g.mass_param, d));
        rep.push_row(vec![
            g.mass_param,
            d,
            d / q.l2_norm,
            g.l2_norm * g.l2_norm,
            q_norm_sq,
            g.residual,
        ]);
    }
    // rate of ‖R_μ − Q‖ in the mass parameter
    let lx: Vec<f64> = dists.iter().map(|d| d.0.ln()).collect();
    let ly: Vec<f64> = dists.iter().map(|d| d.1.max(f64::MIN_POSITIVE).ln()).collect();
    rep.fitted_slope = Some(least_squares(&lx, &ly)?.slope);
    rep.set_config("tol", tol);
    rep.set_config("r_max", init.grid().r_max());
    rep.set_config("n_r", init.grid().n_r());
    let monotone = dists.windows(2).all(|w| w[1].1 < w[0].1);
    rep.notes.push(format!("distance strictly decreasing: {monotone}"));
    Ok(rep)
}

pub fn family_limit_check_default(mass_params: &[f64], grid: crate::spectral::RadialGrid) -> Result<ExperimentReport> {
    family_limit_check(mass_params, &default_initial_guess(grid), 1e-10)
}

/// `Q_μ(x) = μ^{3/2}R(μx)` for the member `R` of mass parameter `a²`;
/// `Q_μ` solves `√(−Δ+μ²a²)Q_μ + μQ_μ − (|x|⁻¹∗Q_μ²)Q_μ = 0`.
pub fn soliton_profile(g: &GroundState, mu: f64) -> Result<RadialProfile> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(LabError::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    g.profile.to_physical().dilate(mu)
}

/// Evolve `Q_μ` on the radial backend (raw gauge, `m = μ√mass_param`) and
/// return `max_t ‖u(t) − e^{itμ}Q_μ‖/‖Q_μ‖` over the samples.
pub fn soliton_evolution_check(g: &GroundState, mu: f64, t_final: f64, dt: f64) -> Result<f64> {
    soliton_phase_error(g, mu, t_final, dt, 1.0)
}

/// As [`soliton_evolution_check`], comparing against `e^{i·phase_sign·tμ}Q_μ`.
pub fn soliton_phase_error(g: &GroundState, mu: f64, t_final: f64, dt: f64, phase_sign: f64) -> Result<f64> {
    let q = soliton_profile(g, mu)?;
    if t_final == 0.0 {
        return Ok(0.0);
    }
    let m = mu * g.mass_param.sqrt();
    let cfg = EvolutionConfig::new(m, dt, t_final, CoulombBackend::RadialNewton)
        .with_gauge(Gauge::Raw)
        .with_sign(Sign::Focusing)
        .with_sampling(((0.05 / dt).round() as usize).max(1));
    let qn = q.l2_norm();
    let mut worst = 0.0f64;
    evolve_observed(&q, &cfg, |t, u, _| {
        let target = q.map(|v| v * Complex64::from_polar(1.0, phase_sign * t * mu));
        let err = u.to_physical().sub(&target).l2_norm() / qn;
        worst = worst.max(err);
        Ok(())
    })?;
    Ok(worst)
}
