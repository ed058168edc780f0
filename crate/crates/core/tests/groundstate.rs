use std::f64::consts::PI;
use std::sync::OnceLock;

use bslab::groundstate::*;
use bslab::spectral::*;
use num_complex::Complex64;

/// `‖Q‖²`, converged to 1e-9 on `r_max ≥ 256` grids.
const Q_MASS: f64 = 2.692395;

fn q() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| {
        let g = RadialGrid::new(128.0, 8192).unwrap();
        petviashvili_solve(0.0, &default_initial_guess(g), 1e-10).unwrap()
    })
}

#[test]
fn massless_ground_state_identities() {
    let q = q();
    assert!(q.residual < 1e-10);
    assert!(q.positive && q.nonincreasing);
    assert!((q.l2_norm * q.l2_norm - Q_MASS).abs() < 2e-6, "{}", q.l2_norm * q.l2_norm);
    assert!((pohozaev_ratio(q) - 0.5).abs() < 1e-6);
    let (lhs, rhs) = optimal_constant_sides(q);
    assert!((lhs / rhs - 1.0).abs() < 1e-5);
}

#[test]
fn pohozaev_ratio_scales_with_amplitude() {
    let q = q();
    let doubled = q.profile.scale(2.0);
    assert!((profile_pohozaev_ratio(&doubled) - pohozaev_ratio(q) / 4.0).abs() < 1e-12);
}

#[test]
fn kato_hardy_inequality() {
    // ∫|u|²/|x| ≤ (π/2)⟨u, |D|u⟩
    let q = q();
    let g = *q.profile.grid();
    let u = q.profile.to_physical().real_parts();
    let lhs: f64 = u.iter().zip(g.weights()).enumerate().map(|(j, (x, w))| x * x * w / g.r(j)).sum();
    let du = bslab::spectral::radial::apply_radial_symbol(&q.profile, |k| Complex64::new(k, 0.0)).real_parts();
    let kin: f64 = du.iter().zip(&u).zip(g.weights()).map(|((a, b), w)| a * b * w).sum();
    assert!(lhs <= PI / 2.0 * kin);
    assert!(lhs > 0.5 * kin);
}

#[test]
fn newton_potential_bounds() {
    // (1/r)∫_{|y|<r}Q² ≤ V(r) ≤ ‖Q‖²/r, with equality in the far field
    let q = q();
    let g = *q.profile.grid();
    let v = newton_potential(q);
    let mass = q.l2_norm * q.l2_norm;
    for j in (0..g.n_r() / 2).step_by(97) {
        let r = g.r(j);
        assert!(v[j] <= mass / r * (1.0 + 1e-9), "r = {r}");
    }
    let j = g.n_r() / 2;
    assert!((v[j] * g.r(j) / mass - 1.0).abs() < 1e-4);
    assert!(v.iter().all(|x| *x > 0.0));
}

#[test]
fn massless_tail_decays_like_r_to_minus_four() {
    let fit = decay_fit(&q().profile, (10.0, 30.0)).unwrap();
    assert!((fit.slope + 4.0).abs() < 0.25, "{}", fit.slope);
    assert!(fit.power_law);
}

#[test]
fn decay_fit_oracles() {
    let g = RadialGrid::new(128.0, 4096).unwrap();
    let pure = RadialProfile::from_real_fn(g, |r| r.max(1.0).powi(-4));
    let fit = decay_fit(&pure, (10.0, 30.0)).unwrap();
    assert!((fit.slope + 4.0).abs() < 1e-3);
    assert!(fit.curvature < 1e-6 && fit.power_law);
    let gauss = RadialProfile::from_real_fn(g, |r| (-r * r / 100.0).exp());
    assert!(!decay_fit(&gauss, (10.0, 30.0)).unwrap().power_law);
    assert!(decay_fit(&pure, (10.0, 80.0)).is_err());
    assert!(decay_fit(&pure, (3.0, 2.0)).is_err());
}

#[test]
fn constrained_minimization_matches_petviashvili() {
    let g = RadialGrid::new(64.0, 4096).unwrap();
    let init = default_initial_guess(g);
    let (gs, rep) = constrained_minimize(0.0, &init).unwrap();
    assert!(rep.theta > 0.0);
    let p = petviashvili_solve(0.0, &init, 1e-10).unwrap();
    assert!(gs.profile.sub(&p.profile).l2_norm() < 1e-8 * p.l2_norm);
    // F is quadratic, V quartic: the minimum on {V = 4} is twice that on {V = 1}
    let (_, rep4) = constrained_minimize_with(0.0, &init, 4.0, 1e-10).unwrap();
    assert!((rep4.f_value / rep.f_value - 2.0).abs() < 1e-9);
}

#[test]
fn massive_family_is_positive_and_below_q() {
    let g = RadialGrid::new(64.0, 4096).unwrap();
    let r = petviashvili_solve(1.0, &default_initial_guess(g), 1e-10).unwrap();
    assert!(r.positive && r.nonincreasing);
    assert!(r.l2_norm * r.l2_norm < Q_MASS);
    // exponential tail, not a power law
    assert!(!decay_fit(&r.profile, (10.0, 30.0)).unwrap().power_law);
}

#[test]
fn solver_rejects_bad_input() {
    let g = RadialGrid::new(32.0, 512).unwrap();
    let init = default_initial_guess(g);
    assert!(petviashvili_solve(-1.0, &init, 1e-10).is_err());
    assert!(petviashvili_solve(0.0, &init, 1e-14).is_err());
    let neg = RadialProfile::from_real_fn(g, |r| -(-r * r).exp());
    assert!(petviashvili_solve(0.0, &neg, 1e-10).is_err());
    assert!(constrained_minimize_with(0.0, &init, 0.0, 1e-10).is_err());
    assert!(soliton_profile(q(), 0.0).is_err());
}
