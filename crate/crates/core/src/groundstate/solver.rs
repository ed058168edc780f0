//! Ground states of `√(−Δ+a²)R + R − (|x|⁻¹∗R²)R = 0` on the radial grid,
//! with `a² = mass_param` (`a = 0` is the massless profile `Q`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::radial::{apply_radial_symbol, radial_sobolev_norm};
use crate::spectral::{RadialGrid, RadialProfile};

/// Petviashvili stabilizing exponent for a cubic nonlinearity.
const GAMMA: f64 = 1.5;
const MAX_ITER: usize = 20_000;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub profile: RadialProfile,
    pub mass_param: f64,
    /// Lagrange multiplier when produced by the constrained minimization.
    pub theta: Option<f64>,
    /// `‖LR − N(R)‖_{L²}`.
    pub residual: f64,
    pub l2_norm: f64,
    pub h_half_norm: f64,
    pub iterations: usize,
    /// Last Petviashvili quotient `S` (1 at an exact solution).
    pub stabilization: f64,
    pub positive: bool,
    pub nonincreasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub f_value: f64,
    pub v_constraint: f64,
    pub theta: f64,
    pub iterations: usize,
}

/// Radial operators of the ground-state equation.
pub(crate) struct Operators {
    pub grid: RadialGrid,
    pub a2: f64,
}

impl Operators {
    pub fn new(grid: RadialGrid, mass_param: f64) -> Self {
        Operators { grid, a2: mass_param }
    }

    fn sym_l(&self, k: f64) -> f64 {
        (k * k + self.a2).sqrt() + 1.0
    }

    fn from_real(&self, v: &[f64]) -> RadialProfile {
        RadialProfile::from_real(self.grid, v).expect("grid length")
    }

    /// `L u = √(−Δ+a²)u + u`.
    pub fn apply_l(&self, u: &[f64]) -> Vec<f64> {
        apply_radial_symbol(&self.from_real(u), |k| Complex64::new(self.sym_l(k), 0.0)).real_parts()
    }

    pub fn apply_l_inv(&self, u: &[f64]) -> Vec<f64> {
        apply_radial_symbol(&self.from_real(u), |k| Complex64::new(1.0 / self.sym_l(k), 0.0))
            .real_parts()
    }

    /// `V = |x|⁻¹∗u²` via the sine-basis Newton formula.
    pub fn potential(&self, u: &[f64]) -> Vec<f64> {
        let rho: Vec<f64> = u.iter().map(|x| x * x).collect();
        apply_radial_symbol(&self.from_real(&rho), |k| Complex64::new(4.0 * std::f64::consts::PI / (k * k), 0.0))
            .real_parts()
    }

    pub fn nonlinearity(&self, u: &[f64]) -> Vec<f64> {
        self.potential(u).iter().zip(u).map(|(v, x)| v * x).collect()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(self.grid.weights())
            .map(|((x, y), w)| x * y * w)
            .sum()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// `∫(|x|⁻¹∗u²)u²`.
    pub fn v_functional(&self, u: &[f64]) -> f64 {
        self.inner(&self.nonlinearity(u), u)
    }

    /// `F(u) = ⟨u, √(−Δ+a²)u⟩ + ‖u‖² = ⟨u, Lu⟩`.
    pub fn f_functional(&self, u: &[f64]) -> f64 {
        self.inner(&self.apply_l(u), u)
    }

    pub fn residual(&self, u: &[f64]) -> f64 {
        let lu = self.apply_l(u);
        let nu = self.nonlinearity(u);
        let d: Vec<f64> = lu.iter().zip(&nu).map(|(a, b)| a - b).collect();
        self.norm(&d)
    }
}

fn validate_init(init: &RadialProfile) -> Result<Vec<f64>> {
    let p = init.to_physical();
    if p.values().iter().any(|v| v.im.abs() > 1e-12 * (1.0 + v.re.abs())) {
        return Err(LabError::InvalidParameter("initial profile must be real".into()));
    }
    let v = p.real_parts();
    let max = v.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) || v.iter().any(|x| !x.is_finite()) {
        return Err(LabError::InvalidParameter("initial profile must be positive and finite".into()));
    }
    Ok(v)
}

fn check_mass_param(mass_param: f64) -> Result<()> {
    if !(mass_param.is_finite() && mass_param >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "mass_param must be >= 0, got {mass_param}"
        )));
    }
    Ok(())
}

/// Relative level below which a sample counts as non-positive.
const POSITIVITY_TOL: f64 = 1e-12;

fn is_positive(u: &[f64]) -> bool {
    let max = u.iter().cloned().fold(0.0, f64::max);
    max > 0.0 && u.iter().all(|&x| x > -POSITIVITY_TOL * max)
}

fn is_nonincreasing(u: &[f64]) -> bool {
    let max = u.iter().cloned().fold(0.0, f64::max);
    u.windows(2).all(|w| w[1] <= w[0] + POSITIVITY_TOL * max)
}

pub(crate) fn finish(
    ops: &Operators,
    u: Vec<f64>,
    theta: Option<f64>,
    iterations: usize,
    stabilization: f64,
) -> GroundState {
    let profile = RadialProfile::from_real(ops.grid, &u).expect("grid length");
    GroundState {
        residual: ops.residual(&u),
        l2_norm: ops.norm(&u),
        h_half_norm: radial_sobolev_norm(&profile, 0.5),
        positive: is_positive(&u),
        nonincreasing: is_nonincreasing(&u),
        mass_param: ops.a2,
        theta,
        iterations,
        stabilization,
        profile,
    }
}

/// `e^{−r²/4}` on the grid.
pub fn default_initial_guess(grid: RadialGrid) -> RadialProfile {
    RadialProfile::from_real_fn(grid, |r| (-r * r / 4.0).exp())
}

/// Petviashvili iteration `R ← S^{3/2} L⁻¹N(R)`, `S = ⟨LR,R⟩/⟨N(R),R⟩`.
pub fn petviashvili_solve(mass_param: f64, init: &RadialProfile, tol: f64) -> Result<GroundState> {
    check_mass_param(mass_param)?;
    if !(tol >= 1e-12) {
        return Err(LabError::InvalidParameter(format!("tol must be >= 1e-12, got {tol}")));
    }
    let ops = Operators::new(*init.grid(), mass_param);
    let mut u = validate_init(init)?;
    let mut s = 1.0;
    for it in 0..MAX_ITER {
        let lu = ops.apply_l(&u);
        let nu = ops.nonlinearity(&u);
        let res: Vec<f64> = lu.iter().zip(&nu).map(|(a, b)| a - b).collect();
        let residual = ops.norm(&res);
        if !residual.is_finite() {
            return Err(LabError::Divergence {
                iterations: it,
                reason: "non-finite residual".into(),
            });
        }
        if residual < tol {
            return Ok(finish(&ops, u, None, it, s));
        }
        s = ops.inner(&lu, &u) / ops.inner(&nu, &u);
        if !(1e-6..=1e6).contains(&s) {
            return Err(LabError::Divergence {
                iterations: it,
                reason: format!("stabilizing factor S = {s:e} left [1e-6, 1e6]"),
            });
        }
        let next = ops.apply_l_inv(&nu);
        let c = s.powf(GAMMA);
        u = next.into_iter().map(|x| c * x).collect();
        if !is_positive(&u) {
            let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(LabError::Divergence {
                iterations: it + 1,
                reason: format!("iterate lost positivity (min {min:e})"),
            });
        }
    }
    Err(LabError::NotConverged(format!(
        "Petviashvili did not reach residual {tol:e} in {MAX_ITER} iterations"
    )))
}

/// Minimize `F(u) = ⟨u, (√(−Δ+a²)+1)u⟩` on `{V(u) = sigma}` by a
/// Sobolev-preconditioned gradient flow `u ← (1−τ)u + τθL⁻¹N(u)`,
/// renormalized onto the constraint after each step.
///
/// Returns the minimizer `T` (inside the report) and `R = θ^{1/2}T` rescaled to
/// `V = 1` as a [`GroundState`]; `θ = F(T)/V(T)`.
pub fn constrained_minimize(mass_param: f64, init: &RadialProfile) -> Result<(GroundState, VariationalReport)> {
    constrained_minimize_with(mass_param, init, 1.0, 1e-10)
}

pub fn constrained_minimize_with(
    mass_param: f64,
    init: &RadialProfile,
    sigma: f64,
    tol: f64,
) -> Result<(GroundState, VariationalReport)> {
    let (t, report) = minimize_raw(mass_param, init, sigma, tol)?;
    let ops = Operators::new(*init.grid(), mass_param);
    let theta = report.theta;
    // V(R) = θ² V(T); R solves LR = N(R) when V(T) = σ and θ = F/V
    let r: Vec<f64> = t.iter().map(|x| x * theta.sqrt()).collect();
    let gs = finish(&ops, r, Some(theta), report.iterations, 1.0);
    Ok((gs, report))
}

/// Minimizer `T` itself together with the report.
pub fn minimize_raw(
    mass_param: f64,
    init: &RadialProfile,
    sigma: f64,
    tol: f64,
) -> Result<(Vec<f64>, VariationalReport)> {
    check_mass_param(mass_param)?;
    if !(sigma > 0.0) {
        return Err(LabError::InvalidParameter("constraint level must be positive".into()));
    }
    let ops = Operators::new(*init.grid(), mass_param);
    let mut u = validate_init(init)?;
    let v0 = ops.v_functional(&u);
    if !(v0 > 0.0) {
        return Err(LabError::InvalidParameter("V(init) must be positive".into()));
    }
    let normalize = |u: &mut Vec<f64>, v: f64| {
        let c = (sigma / v).powf(0.25);
        u.iter_mut().for_each(|x| *x *= c);
    };
    normalize(&mut u, v0);
    let mut tau = 1.0;
    let mut f_prev = ops.f_functional(&u);
    let mut flat = 0usize;
    for it in 0..MAX_ITER {
        let lu = ops.apply_l(&u);
        let nu = ops.nonlinearity(&u);
        let f = ops.inner(&lu, &u);
        let v = ops.inner(&nu, &u);
        let theta = f / v;
        let res: Vec<f64> = lu.iter().zip(&nu).map(|(a, b)| a - theta * b).collect();
        let rel = ops.norm(&res) / ops.norm(&lu);
        if rel < tol {
            return Ok((
                u,
                VariationalReport {
                    f_value: f,
                    v_constraint: v,
                    theta,
                    iterations: it,
                },
            ));
        }
        let step = ops.apply_l_inv(&nu);
        let mut trial: Vec<f64> = u
            .iter()
            .zip(&step)
            .map(|(a, b)| (1.0 - tau) * a + tau * theta * b)
            .collect();
        let vt = ops.v_functional(&trial);
        normalize(&mut trial, vt);
        let ft = ops.f_functional(&trial);
        if ft > f_prev * (1.0 + 1e-13) && tau > 1e-3 {
            tau *= 0.5;
            continue;
        }
        if (f_prev - ft) < 1e-14 * f_prev.abs() {
            flat += 1;
            if flat >= 100 {
                return Err(LabError::Stagnation {
                    iterations: it,
                    residual: rel,
                });
            }
        } else {
            flat = 0;
        }
        f_prev = ft;
        u = trial;
    }
    Err(LabError::NotConverged(format!(
        "constrained minimization did not converge in {MAX_ITER} iterations"
    )))
}

pub(crate) fn ground_state_profile(g: &GroundState) -> Vec<f64> {
    g.profile.to_physical().real_parts()
}
