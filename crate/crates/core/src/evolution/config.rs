use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::CoulombBackend;

/// Which form of the equation is integrated.
///
/// `Raw` is `i∂ₜu = √(−Δ+m²)u ∓ Vu`; `MassShifted` evolves `e^{itm}u`, whose
/// linear flow is `e^{itφ_m(D)}` with `φ_m(ξ) = m − √(m²+|ξ|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    Raw,
    MassShifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    /// `+1` for the attractive (focusing) Hartree term.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub m: f64,
    pub dt: f64,
    pub t_final: f64,
    pub backend: CoulombBackend,
    #[serde(default = "default_gauge")]
    pub gauge: Gauge,
    #[serde(default = "default_sign")]
    pub sign: Sign,
    /// 2/3-rule truncation of the density spectrum (torus only).
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Record observables every this many steps.
    #[serde(default = "default_one")]
    pub sample_every: usize,
    /// Keep a copy of the state every this many steps (0 = never).
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_gauge() -> Gauge {
    Gauge::Raw
}
fn default_sign() -> Sign {
    Sign::Focusing
}
fn default_true() -> bool {
    true
}
fn default_one() -> usize {
    1
}

impl EvolutionConfig {
    pub fn new(m: f64, dt: f64, t_final: f64, backend: CoulombBackend) -> Self {
        EvolutionConfig {
            m,
            dt,
            t_final,
            backend,
            gauge: Gauge::Raw,
            sign: Sign::Focusing,
            dealias: true,
            sample_every: 1,
            snapshot_every: 0,
        }
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_sampling(mut self, sample_every: usize) -> Self {
        self.sample_every = sample_every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(LabError::InvalidParameter(format!("m must be >= 0, got {}", self.m)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(LabError::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "t_final must be > 0, got {}",
                self.t_final
            )));
        }
        if self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(LabError::InvalidParameter(format!(
                "dt = {} exceeds t_final = {}",
                self.dt, self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(LabError::InvalidParameter("sample_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps; `dt` is shrunk slightly if it does not divide `t_final`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_final / self.steps() as f64
    }

    /// Warning text when `dt·max|ω| > π` for the given largest resolved frequency.
    pub fn phase_resolution_warning(&self, k_max: f64) -> Option<String> {
        let omega = match self.gauge {
            Gauge::Raw => (self.m * self.m + k_max * k_max).sqrt(),
            Gauge::MassShifted => (self.m * self.m + k_max * k_max).sqrt() - self.m,
        };
        let phase = self.dt * omega;
        (phase > std::f64::consts::PI)
            .then(|| format!("dt·max|ω| = {phase:.3} exceeds π; fastest modes are under-resolved"))
    }
}
