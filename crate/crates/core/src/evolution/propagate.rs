use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{EvolutionConfig, Gauge, Sign};
use super::medium::Medium;
use crate::error::{LabError, Result};
use crate::par::sum_by;

/// Frequency `ω(k)` of the linear flow, which multiplies `û` by `e^{itω}`.
#[inline]
pub fn linear_frequency(k: f64, m: f64, gauge: Gauge) -> f64 {
    let w = (m * m + k * k).sqrt();
    match gauge {
        Gauge::Raw => -w,
        Gauge::MassShifted => m - w,
    }
}

fn phases(ks: &[f64], t: f64, m: f64, gauge: Gauge) -> Vec<Complex64> {
    ks.par_iter()
        .map(|&k| Complex64::from_polar(1.0, t * linear_frequency(k, m, gauge)))
        .collect()
}

/// Exact free flow for time `t` (any sign), returned in spectral form.
pub fn propagate_linear<M: Medium>(u: &M, t: f64, m: f64, gauge: Gauge) -> M {
    let mut s = u.spectral_coefficients();
    let ph = phases(&u.wavenumbers(), t, m, gauge);
    s.par_iter_mut().zip(ph.par_iter()).for_each(|(v, p)| *v *= p);
    u.with_spectral(s)
}

/// Mass and energy at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub mass: f64,
    pub energy: f64,
    pub linf: f64,
}

impl Observables {
    pub fn l2(&self) -> f64 {
        self.mass.sqrt()
    }
}

struct Workspace {
    kinetic: Vec<f64>,
    kernel: Vec<f64>,
    spec_w: Vec<f64>,
    phys_w: Vec<f64>,
}

impl Workspace {
    fn new<M: Medium>(u: &M, m: f64, dealias: bool) -> Self {
        Workspace {
            kinetic: u.wavenumbers().iter().map(|k| (m * m + k * k).sqrt()).collect(),
            kernel: u.coulomb_kernel(dealias),
            spec_w: u.spectral_weights(),
            phys_w: u.physical_weights(),
        }
    }

    /// `E = ½⟨u, √(−Δ+m²)u⟩ ∓ ¼∫V|u|²` from spectral coefficients.
    fn observe<M: Medium>(&self, u: &M, spec: &[Complex64], sign: Sign) -> Observables {
        let mass = sum_by(spec.len(), |i| spec[i].norm_sqr() * self.spec_w[i]);
        let kin = sum_by(spec.len(), |i| spec[i].norm_sqr() * self.spec_w[i] * self.kinetic[i]);
        let mut phys = spec.to_vec();
        u.to_physical_buf(&mut phys);
        let v = u.potential(&phys, &self.kernel);
        let pot = sum_by(phys.len(), |i| phys[i].norm_sqr() * v[i] * self.phys_w[i]);
        let linf = phys.par_iter().map(|p| p.norm_sqr()).reduce(|| 0.0, f64::max).sqrt();
        Observables {
            mass,
            energy: 0.5 * kin - sign.factor() * 0.25 * pot,
            linf,
        }
    }
}

/// Mass, energy and sup norm, with the same Coulomb kernel the evolution uses.
pub fn observables<M: Medium>(u: &M, m: f64, sign: Sign, dealias: bool) -> Observables {
    let ws = Workspace::new(u, m, dealias);
    ws.observe(u, &u.spectral_coefficients(), sign)
}

/// Sampled diagnostics of a run.
#[derive(Debug, Clone)]
pub struct Trajectory<M> {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub linf: Vec<f64>,
    pub snapshots: Vec<(f64, M)>,
    pub final_state: M,
    pub warnings: Vec<String>,
}

impl<M> Trajectory<M> {
    pub fn l2(&self) -> Vec<f64> {
        self.mass.iter().map(|m| m.sqrt()).collect()
    }

    pub fn max_relative_mass_drift(&self) -> f64 {
        relative_drift(&self.mass)
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

fn relative_drift(xs: &[f64]) -> f64 {
    let x0 = xs.first().copied().unwrap_or(0.0);
    let d = xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    if x0 == 0.0 {
        d
    } else {
        d / x0.abs()
    }
}

const BLOW_UP_FACTOR: f64 = 1e6;

/// Strang splitting: half free step, exact potential step `u ← e^{±i dt V}u`,
/// half free step. Consecutive half steps are fused between samples.
///
/// `observer(t, state, observables)` runs at every sample, including `t = 0`.
pub fn evolve_observed<M, F>(u0: &M, cfg: &EvolutionConfig, mut observer: F) -> Result<Trajectory<M>>
where
    M: Medium,
    F: FnMut(f64, &M, &Observables) -> Result<()>,
{
    cfg.validate()?;
    let steps = cfg.steps();
    let dt = cfg.effective_dt();
    let ks = u0.wavenumbers();
    let k_max = ks.iter().copied().fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if let Some(w) = cfg.phase_resolution_warning(k_max) {
        warnings.push(w);
    }
    let half = phases(&ks, 0.5 * dt, cfg.m, cfg.gauge);
    let full = phases(&ks, dt, cfg.m, cfg.gauge);
    let ws = Workspace::new(u0, cfg.m, cfg.dealias);
    let s = cfg.sign.factor();

    let mut spec = u0.spectral_coefficients();
    let mut traj = Trajectory {
        times: Vec::new(),
        mass: Vec::new(),
        energy: Vec::new(),
        linf: Vec::new(),
        snapshots: Vec::new(),
        final_state: u0.clone(),
        warnings,
    };

    let mut record = |t: f64, spec: &[Complex64], step: usize, traj: &mut Trajectory<M>| -> Result<()> {
        let state = u0.with_spectral(spec.to_vec());
        let obs = ws.observe(u0, spec, cfg.sign);
        if !(obs.mass.is_finite() && obs.energy.is_finite()) {
            return Err(LabError::NonFinite {
                last_good_time: traj.times.last().copied().unwrap_or(0.0),
            });
        }
        traj.times.push(t);
        traj.mass.push(obs.mass);
        traj.energy.push(obs.energy);
        traj.linf.push(obs.linf);
        observer(t, &state, &obs)?;
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            traj.snapshots.push((t, state));
        }
        Ok(())
    };

    record(0.0, &spec, 0, &mut traj)?;
    let linf0 = traj.linf[0];
    let mut last_good = 0.0;

    spec.par_iter_mut().zip(half.par_iter()).for_each(|(v, p)| *v *= p);
    let mut phys = vec![Complex64::default(); spec.len()];
    for step in 1..=steps {
        let t = step as f64 * dt;
        phys.copy_from_slice(&spec);
        u0.to_physical_buf(&mut phys);
        // NaN fails the comparison in `max`, so test the squares separately
        let (finite, sup2) = phys
            .par_iter()
            .map(|p| {
                let q = p.norm_sqr();
                (q.is_finite(), q)
            })
            .reduce(|| (true, 0.0), |a, b| (a.0 && b.0, a.1.max(b.1)));
        let sup = sup2.sqrt();
        if !finite {
            return Err(LabError::NonFinite { last_good_time: last_good });
        }
        if linf0 > 0.0 && sup > BLOW_UP_FACTOR * linf0 {
            return Err(LabError::BlowUp {
                time: t - 0.5 * dt,
                growth: sup / linf0,
            });
        }
        let v = u0.potential(&phys, &ws.kernel);
        phys.par_iter_mut()
            .zip(v.par_iter())
            .for_each(|(p, v)| {
                let (sn, cs) = (s * dt * v).sin_cos();
                *p *= Complex64::new(cs, sn);
            });
        u0.to_spectral_buf(&mut phys);
        std::mem::swap(&mut spec, &mut phys);

        let sample = step == steps || step % cfg.sample_every == 0;
        if sample {
            spec.par_iter_mut().zip(half.par_iter()).for_each(|(v, p)| *v *= p);
            record(t, &spec, step, &mut traj)?;
            last_good = t;
            if step < steps {
                spec.par_iter_mut().zip(half.par_iter()).for_each(|(v, p)| *v *= p);
            }
        } else {
            spec.par_iter_mut().zip(full.par_iter()).for_each(|(v, p)| *v *= p);
            last_good = t - 0.5 * dt;
        }
    }
    traj.final_state = u0.with_spectral(spec);
    Ok(traj)
}

pub fn evolve<M: Medium>(u0: &M, cfg: &EvolutionConfig) -> Result<Trajectory<M>> {
    evolve_observed(u0, cfg, |_, _, _| Ok(()))
}

/// One splitting step of size `dt` (returned in spectral form).
pub fn strang_step<M: Medium>(u: &M, dt: f64, cfg: &EvolutionConfig) -> Result<M> {
    let mut c = cfg.clone();
    c.dt = dt;
    c.t_final = dt;
    c.snapshot_every = 0;
    Ok(evolve(u, &c)?.final_state)
}
