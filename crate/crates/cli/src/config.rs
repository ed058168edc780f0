use std::path::{Path, PathBuf};

use bslab::estimates::{ProbeConfig, ProbeKind};
use bslab::evolution::{EvolutionConfig, Gauge, Sign};
use bslab::illposed::WavepacketSpec;
use bslab::spectral::{CoulombBackend, Grid3, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Whole run configuration; one optional block per subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub strict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groundstate: Option<GroundStateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illposed_c3: Option<C3Block>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illposed_radial: Option<RadialBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illposed_uniform: Option<UniformBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<EstimatesBlock>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bslab-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output_dir: default_output_dir(),
            strict: false,
            evolve: None,
            groundstate: None,
            illposed_c3: None,
            illposed_radial: None,
            illposed_uniform: None,
            estimates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveBlock {
    pub m: f64,
    pub dt: f64,
    pub t_final: f64,
    pub backend: CoulombBackend,
    #[serde(default = "default_gauge")]
    pub gauge: Gauge,
    #[serde(default = "default_sign")]
    pub sign: Sign,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "one")]
    pub sample_every: usize,
    #[serde(default)]
    pub snapshot_every: usize,
    /// Torus grid: points per dimension and box side.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_box")]
    pub box_length: f64,
    /// Radial grid.
    #[serde(default = "default_evolve_n_r")]
    pub n_r: usize,
    #[serde(default = "default_evolve_r_max")]
    pub r_max: f64,
    #[serde(default)]
    pub initial: InitialData,
}

fn default_gauge() -> Gauge {
    Gauge::Raw
}
fn default_sign() -> Sign {
    Sign::Focusing
}
fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn default_n() -> usize {
    32
}
fn default_box() -> f64 {
    16.0
}
fn default_evolve_n_r() -> usize {
    1024
}
fn default_evolve_r_max() -> f64 {
    32.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero {},
    /// `amplitude·exp(−|x|²/(2 width²))`.
    Gaussian { amplitude: f64, width: f64 },
    /// Ground-state soliton `Q_μ`, solved on the radial grid.
    Soliton {
        mu: f64,
        #[serde(default)]
        mass_param: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Container written by an earlier run; must match the backend and grid.
    File { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian { amplitude: 0.2, width: 2.0 }
    }
}

fn default_tol() -> f64 {
    1e-10
}

impl EvolveBlock {
    pub fn minimal(m: f64, dt: f64, t_final: f64, backend: CoulombBackend) -> Self {
        EvolveBlock {
            m,
            dt,
            t_final,
            backend,
            gauge: default_gauge(),
            sign: default_sign(),
            dealias: true,
            sample_every: 1,
            snapshot_every: 0,
            n: default_n(),
            box_length: default_box(),
            n_r: default_evolve_n_r(),
            r_max: default_evolve_r_max(),
            initial: InitialData::default(),
        }
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        let mut c = EvolutionConfig::new(self.m, self.dt, self.t_final, self.backend)
            .with_gauge(self.gauge)
            .with_sign(self.sign)
            .with_sampling(self.sample_every);
        c.dealias = self.dealias;
        c.snapshot_every = self.snapshot_every;
        c
    }

    pub fn torus_grid(&self) -> Result<Grid3> {
        Grid3::new(self.n, self.box_length).map_err(|e| CliError::constraint("evolve.n", e))
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_max, self.n_r).map_err(|e| CliError::constraint("evolve.n_r", e))
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.evolution_config();
        if !(c.dt.is_finite() && c.dt > 0.0) {
            return Err(CliError::constraint("evolve.dt", format!("dt > 0 required, got {}", c.dt)));
        }
        c.validate().map_err(|e| CliError::constraint("evolve", e))?;
        match self.backend {
            CoulombBackend::TorusFft => {
                self.torus_grid()?;
            }
            CoulombBackend::RadialNewton => {
                self.radial_grid()?;
            }
        }
        match &self.initial {
            InitialData::Gaussian { amplitude, width } => {
                if !(width.is_finite() && *width > 0.0 && amplitude.is_finite()) {
                    return Err(CliError::constraint(
                        "evolve.initial",
                        "gaussian needs width > 0 and a finite amplitude",
                    ));
                }
            }
            InitialData::Soliton { mu, mass_param, .. } => {
                if self.backend != CoulombBackend::RadialNewton {
                    return Err(CliError::constraint("evolve.initial", "soliton data needs backend = radial_newton"));
                }
                if !(*mu > 0.0 && mu.is_finite()) || !(*mass_param >= 0.0) {
                    return Err(CliError::constraint("evolve.initial", "soliton needs mu > 0 and mass_param >= 0"));
                }
            }
            InitialData::Zero {} | InitialData::File { .. } => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundStateMethod {
    Petviashvili,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundStateBlock {
    pub mass_param: f64,
    pub tol: f64,
    pub method: GroundStateMethod,
    pub n_r: usize,
    pub r_max: f64,
    /// Fit window for the tail slope; defaults to `[10, 30]`, scaled down on small boxes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_window: Option<[f64; 2]>,
    /// Also write the profile as CSV.
    pub csv: bool,
}

impl Default for GroundStateBlock {
    fn default() -> Self {
        GroundStateBlock {
            mass_param: 0.0,
            tol: 1e-10,
            method: GroundStateMethod::Petviashvili,
            n_r: 4096,
            r_max: 64.0,
            decay_window: None,
            csv: true,
        }
    }
}

impl GroundStateBlock {
    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_max, self.n_r).map_err(|e| CliError::constraint("groundstate.n_r", e))
    }

    pub fn window(&self) -> [f64; 2] {
        self.decay_window.unwrap_or(if self.r_max >= 64.0 {
            [10.0, 30.0]
        } else {
            [self.r_max * 10.0 / 64.0, self.r_max * 30.0 / 64.0]
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.mass_param >= 0.0 && self.mass_param.is_finite()) {
            return Err(CliError::constraint("groundstate.mass_param", "mass_param >= 0 required"));
        }
        if !(self.tol >= 1e-12) {
            return Err(CliError::constraint("groundstate.tol", format!("tol >= 1e-12 required, got {}", self.tol)));
        }
        let [r1, r2] = self.window();
        if !(r1 > 0.0 && r2 > r1 && r2 <= self.r_max / 2.0) {
            return Err(CliError::constraint(
                "groundstate.decay_window",
                format!("0 < r1 < r2 <= r_max/2 required, got [{r1}, {r2}]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct C3Block {
    pub s: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub delta: f64,
    pub t: f64,
    pub samples: usize,
    pub m: f64,
}

impl Default for C3Block {
    fn default() -> Self {
        C3Block {
            s: vec![0.0, 0.25, 0.4],
            lambdas: vec![64.0, 128.0, 256.0, 512.0],
            delta: 0.25,
            t: 0.5,
            samples: 1_000_000,
            m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadialBlock {
    pub s: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub delta: f64,
    pub samples: usize,
    pub m: f64,
}

impl Default for RadialBlock {
    fn default() -> Self {
        RadialBlock {
            s: vec![-0.25, 0.0],
            lambdas: vec![64.0, 128.0, 256.0, 512.0],
            delta: 0.25,
            samples: 1_000_000,
            m: 0.0,
        }
    }
}

fn check_table(key: &str, s: &[f64], lambdas: &[f64], samples: usize, m: f64) -> Result<()> {
    if s.is_empty() || s.iter().any(|x| !x.is_finite()) {
        return Err(CliError::constraint(&format!("{key}.s"), "at least one finite s required"));
    }
    if lambdas.len() < 4 {
        return Err(CliError::constraint(
            &format!("{key}.lambdas"),
            format!("at least 4 lambda values required, got {}", lambdas.len()),
        ));
    }
    let q = lambdas[1] / lambdas[0];
    let geometric = q > 1.0 && lambdas.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(CliError::constraint(
            &format!("{key}.lambdas"),
            "lambdas must form an increasing geometric sequence",
        ));
    }
    if samples < 10_000 {
        return Err(CliError::constraint(&format!("{key}.samples"), format!("samples >= 1e4 required, got {samples}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(CliError::constraint(&format!("{key}.m"), "m >= 0 required"));
    }
    Ok(())
}

impl C3Block {
    pub fn validate(&self) -> Result<()> {
        check_table("illposed_c3", &self.s, &self.lambdas, self.samples, self.m)?;
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(CliError::constraint("illposed_c3.t", "t > 0 required"));
        }
        for &l in &self.lambdas {
            WavepacketSpec::cube_pair(l, self.delta).map_err(|e| CliError::constraint("illposed_c3", e))?;
        }
        Ok(())
    }
}

impl RadialBlock {
    pub fn validate(&self) -> Result<()> {
        check_table("illposed_radial", &self.s, &self.lambdas, self.samples, self.m)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CliError::constraint("illposed_radial.delta", "0 < delta < 1 required"));
        }
        for &l in &self.lambdas {
            WavepacketSpec::annulus(l).map_err(|e| CliError::constraint("illposed_radial", e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UniformBlock {
    pub t: f64,
    pub n: Vec<usize>,
    pub m: f64,
    pub n_r: usize,
    pub r_max: f64,
    pub tol: f64,
}

impl Default for UniformBlock {
    fn default() -> Self {
        UniformBlock { t: 1.0, n: (1..=8).collect(), m: 0.0, n_r: 8192, r_max: 128.0, tol: 1e-10 }
    }
}

impl UniformBlock {
    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_max, self.n_r).map_err(|e| CliError::constraint("illposed_uniform.n_r", e))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(CliError::constraint("illposed_uniform.t", "t > 0 required"));
        }
        if self.n.is_empty() {
            return Err(CliError::constraint("illposed_uniform.n", "at least one n required"));
        }
        if !(self.m == 0.0 || self.m == 1.0) {
            return Err(CliError::constraint("illposed_uniform.m", format!("m must be 0 or 1, got {}", self.m)));
        }
        Ok(())
    }
}

/// Probe preset plus optional overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesBlock {
    pub probe: ProbeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

impl EstimatesBlock {
    pub fn new(probe: ProbeKind) -> Self {
        EstimatesBlock {
            probe,
            mus: None,
            lambda: None,
            seeds: None,
            n: None,
            box_length: None,
            n_t: None,
            s: None,
            b: None,
            b_prime: None,
            t_cutoff: None,
            m: None,
            n_r: None,
            r_max: None,
        }
    }

    pub fn probe_config(&self, seed: u64) -> ProbeConfig {
        let mut c = ProbeConfig::preset(self.probe);
        c.seed = seed;
        if let Some(v) = &self.mus {
            c.mus = v.clone();
        }
        macro_rules! set {
            ($($field:ident => $($target:ident).+),*) => {
                $(if let Some(v) = self.$field { c.$($target).+ = v; })*
            };
        }
        set!(lambda => lambda, seeds => seeds, n => n, box_length => box_length, n_t => n_t,
             s => params.s, b => params.b, b_prime => params.b_prime, t_cutoff => params.t_cutoff,
             m => params.m, n_r => n_r, r_max => r_max);
        c
    }

    pub fn validate(&self, seed: u64) -> Result<()> {
        let c = self.probe_config(seed);
        c.validate().map_err(|e| CliError::constraint("estimates", e))?;
        if self.probe == ProbeKind::BilRad {
            RadialGrid::new(c.r_max, c.n_r).map_err(|e| CliError::constraint("estimates.n_r", e))?;
        } else {
            Grid3::new(c.n, c.box_length).map_err(|e| CliError::constraint("estimates.n", e))?;
        }
        Ok(())
    }
}

/// Parsed configuration and the unknown keys met on the way.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub config: RunConfig,
    pub unknown_keys: Vec<String>,
}

/// Parses TOML; unknown keys are errors when `strict` (or `strict = true` in the file).
pub fn parse_config(text: &str, strict: bool) -> Result<Parsed> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::new(text);
    // `?` segments come from optional blocks
    let config: RunConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string().replace(".?", "")))
        .map_err(|e| parse_error(text, &e))?;
    if (strict || config.strict) && !unknown.is_empty() {
        return Err(CliError::UnknownKeys(unknown));
    }
    config.validate()?;
    Ok(Parsed { config, unknown_keys: unknown })
}

pub fn load_config(path: &Path, strict: bool) -> Result<Parsed> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, strict)
}

fn parse_error(text: &str, e: &toml::de::Error) -> CliError {
    let (line, column) = match e.span() {
        Some(span) => line_col(text, span.start),
        None => (1, 1),
    };
    CliError::Parse { line, column, message: e.message().to_string() }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl RunConfig {
    /// Checks every block that is present.
    pub fn validate(&self) -> Result<()> {
        if let Some(b) = &self.evolve {
            b.validate()?;
        }
        if let Some(b) = &self.groundstate {
            b.validate()?;
        }
        if let Some(b) = &self.illposed_c3 {
            b.validate()?;
        }
        if let Some(b) = &self.illposed_radial {
            b.validate()?;
        }
        if let Some(b) = &self.illposed_uniform {
            b.validate()?;
        }
        if let Some(b) = &self.estimates {
            b.validate(self.seed)?;
        }
        Ok(())
    }
}
