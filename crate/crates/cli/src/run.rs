use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bslab::estimates::{estimate_ids, run_probe};
use bslab::evolution::{evolve, Medium, Trajectory};
use bslab::groundstate::{
    constrained_minimize_with, decay_fit, default_initial_guess, petviashvili_solve, pohozaev_ratio, soliton_profile,
};
use bslab::illposed::{c3_table, radial_table, ratio_report, uniform_continuity_experiment, ScalingTable};
use bslab::report::ExperimentReport;
use bslab::spectral::container::{read_field, read_radial, write_field, write_radial};
use bslab::spectral::{CoulombBackend, Field, RadialProfile, Representation};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{EvolveBlock, GroundStateMethod, InitialData, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{num, Manifest, Outputs, MANIFEST, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    GroundState,
    IllposedC3,
    IllposedRadial,
    IllposedUniform,
    Estimates,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::GroundState => "groundstate",
            Command::IllposedC3 => "illposed-c3",
            Command::IllposedRadial => "illposed-radial",
            Command::IllposedUniform => "illposed-uniform",
            Command::Estimates => "estimates",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Command> {
        Ok(match s {
            "evolve" => Command::Evolve,
            "groundstate" => Command::GroundState,
            "illposed-c3" => Command::IllposedC3,
            "illposed-radial" => Command::IllposedRadial,
            "illposed-uniform" => Command::IllposedUniform,
            "estimates" => Command::Estimates,
            _ => return Err(CliError::Usage(format!("unknown subcommand '{s}'"))),
        })
    }
}

fn missing(block: &str) -> CliError {
    CliError::Usage(format!("no [{block}] block in the configuration"))
}

/// Runs one subcommand into `cfg.output_dir`; returns the manifest and its path.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<(Manifest, PathBuf)> {
    cfg.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let mut out = Outputs::create(&cfg.output_dir)?;
    match cmd {
        Command::Evolve => run_evolve(cfg.evolve.as_ref().ok_or_else(|| missing("evolve"))?, &mut out)?,
        Command::GroundState => run_groundstate(cfg, &mut out)?,
        Command::IllposedC3 => run_c3(cfg, &mut out)?,
        Command::IllposedRadial => run_radial(cfg, &mut out)?,
        Command::IllposedUniform => run_uniform(cfg, &mut out)?,
        Command::Estimates => run_estimates(cfg, &mut out)?,
    }
    let manifest = Manifest {
        subcommand: cmd.name().to_string(),
        version: VERSION.to_string(),
        config: cfg.clone(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        outputs: out.entries().to_vec(),
    };
    let path = out.finish(&manifest)?;
    Ok((manifest, path))
}

/// Re-runs a manifest's configuration into `output_dir` (default: `replay/`
/// next to the manifest) and compares every checksum.
pub fn replay(manifest_path: &Path, output_dir: Option<&Path>) -> Result<(Manifest, PathBuf)> {
    let old = Manifest::read(manifest_path)?;
    let cmd: Command = old.subcommand.parse()?;
    let mut cfg = old.config.clone();
    cfg.output_dir = match output_dir {
        Some(d) => d.to_path_buf(),
        None => manifest_path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    if cfg.output_dir == manifest_path.parent().unwrap_or(Path::new(".")) {
        return Err(CliError::Usage("replay output directory must differ from the original".into()));
    }
    let (new, path) = run(cmd, &cfg)?;
    let mut diffs = Vec::new();
    for a in &old.outputs {
        match new.outputs.iter().find(|b| b.path == a.path) {
            Some(b) if b.sha256 == a.sha256 => {}
            Some(_) => diffs.push(format!("{} differs", a.path)),
            None => diffs.push(format!("{} missing", a.path)),
        }
    }
    for b in &new.outputs {
        if !old.outputs.iter().any(|a| a.path == b.path) {
            diffs.push(format!("{} unexpected", b.path));
        }
    }
    if diffs.is_empty() {
        Ok((new, path))
    } else {
        Err(CliError::Mismatch(diffs))
    }
}

fn run_evolve(b: &EvolveBlock, out: &mut Outputs) -> Result<()> {
    let cfg = b.evolution_config();
    match b.backend {
        CoulombBackend::TorusFft => {
            let grid = b.torus_grid()?;
            let u0 = match &b.initial {
                InitialData::Zero {} => Field::zeros(grid, Representation::Physical),
                InitialData::Gaussian { amplitude, width } => Field::from_fn(grid, |x| {
                    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                    Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0)
                }),
                InitialData::File { path } => {
                    let f = read_field(&mut open(path)?)?;
                    if *f.grid() != grid {
                        return Err(CliError::constraint("evolve.initial.path", "container grid differs from evolve.n/box_length"));
                    }
                    f
                }
                InitialData::Soliton { .. } => unreachable!("rejected by validate"),
            };
            let tr = evolve(&u0, &cfg)?;
            write_trajectory(b, &tr, out, |w, f| write_field(w, f))
        }
        CoulombBackend::RadialNewton => {
            let grid = b.radial_grid()?;
            let u0 = match &b.initial {
                InitialData::Zero {} => RadialProfile::zeros(grid, Representation::Physical),
                InitialData::Gaussian { amplitude, width } => {
                    RadialProfile::from_real_fn(grid, |r| amplitude * (-r * r / (2.0 * width * width)).exp())
                }
                InitialData::Soliton { mu, mass_param, tol } => {
                    let g = petviashvili_solve(*mass_param, &default_initial_guess(grid), *tol)?;
                    soliton_profile(&g, *mu)?
                }
                InitialData::File { path } => {
                    let f = read_radial(&mut open(path)?)?;
                    if *f.grid() != grid {
                        return Err(CliError::constraint("evolve.initial.path", "container grid differs from evolve.n_r/r_max"));
                    }
                    f
                }
            };
            let tr = evolve(&u0, &cfg)?;
            write_trajectory(b, &tr, out, |w, f| write_radial(w, f))
        }
    }
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(std::io::BufReader::new(f))
}

fn write_trajectory<M: Medium>(
    b: &EvolveBlock,
    tr: &Trajectory<M>,
    out: &mut Outputs,
    write: impl Fn(&mut Vec<u8>, &M) -> bslab::Result<()>,
) -> Result<()> {
    let l2 = tr.l2();
    let rows = (0..tr.times.len())
        .map(|i| vec![num(tr.times[i]), num(tr.mass[i]), num(tr.energy[i]), num(tr.linf[i]), num(l2[i])]);
    out.write_csv("trajectory.csv", &["t", "mass", "energy", "linf", "l2"], rows)?;
    let mut snaps = Vec::new();
    for (i, (t, u)) in tr.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:05}.bin");
        out.write_with(&name, |w| write(w, u))?;
        snaps.push(json!({ "t": t, "file": name }));
    }
    out.write_with("final_state.bin", |w| write(w, &tr.final_state))?;
    let cfg = b.evolution_config();
    let last = tr.times.len().saturating_sub(1);
    let summary = json!({
        "backend": b.backend,
        "steps": cfg.steps(),
        "effective_dt": cfg.effective_dt(),
        "samples": tr.times.len(),
        "initial_mass": tr.mass.first(),
        "final_mass": tr.mass.get(last),
        "initial_energy": tr.energy.first(),
        "final_energy": tr.energy.get(last),
        "max_relative_mass_drift": tr.max_relative_mass_drift(),
        "max_relative_energy_drift": tr.max_relative_energy_drift(),
        "warnings": tr.warnings,
        "snapshots": snaps,
        "final_state": "final_state.bin",
    });
    out.write_json("summary.json", &summary)
}

fn run_groundstate(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let b = cfg.groundstate.as_ref().ok_or_else(|| missing("groundstate"))?;
    let grid = b.grid()?;
    let init = default_initial_guess(grid);
    let (gs, variational) = match b.method {
        GroundStateMethod::Petviashvili => (petviashvili_solve(b.mass_param, &init, b.tol)?, None),
        GroundStateMethod::Constrained => {
            let (g, r) = constrained_minimize_with(b.mass_param, &init, 1.0, b.tol)?;
            (g, Some(r))
        }
    };
    out.write_with("profile.bin", |w| write_radial(w, &gs.profile))?;
    if b.csv {
        let phys = gs.profile.to_physical();
        let rows = phys.values().iter().enumerate().map(|(j, v)| vec![num(grid.r(j)), num(v.re)]);
        out.write_csv("profile.csv", &["r", "value"], rows)?;
    }
    let window = b.window();
    let (slope, curvature, power_law, decay_note) = match decay_fit(&gs.profile, (window[0], window[1])) {
        Ok(f) => (Some(f.slope), Some(f.curvature), Some(f.power_law), None),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    let report = json!({
        "method": b.method,
        "mass_param": gs.mass_param,
        "theta": gs.theta.or(variational.as_ref().map(|r| r.theta)),
        "residual": gs.residual,
        "iterations": gs.iterations,
        "l2_norm": gs.l2_norm,
        "mass": gs.l2_norm * gs.l2_norm,
        "h_half_norm": gs.h_half_norm,
        "pohozaev_ratio": pohozaev_ratio(&gs),
        "positive": gs.positive,
        "nonincreasing": gs.nonincreasing,
        "decay_window": window,
        "decay_slope": slope,
        "decay_curvature": curvature,
        "decay_power_law": power_law,
        "decay_note": decay_note,
        "variational": variational.map(|r| json!({
            "f_value": r.f_value,
            "v_constraint": r.v_constraint,
            "theta": r.theta,
            "iterations": r.iterations,
        })),
        "grid": { "n_r": grid.n_r(), "r_max": grid.r_max() },
    });
    out.write_json("report.json", &report)
}

fn write_points(table: &ScalingTable, out: &mut Outputs) -> Result<()> {
    let header = [
        "lambda", "t", "xi1", "xi2", "xi3", "re", "im", "modulus", "stderr", "n_samples", "seed", "acceptance",
        "rejected_singular",
    ];
    let rows = table.rows.iter().flat_map(|row| {
        row.values.iter().map(move |v| {
            vec![
                num(row.spec.lambda()),
                num(row.t),
                num(v.xi[0]),
                num(v.xi[1]),
                num(v.xi[2]),
                num(v.value.re),
                num(v.value.im),
                num(v.modulus()),
                num(v.stderr),
                v.n_samples.to_string(),
                v.seed.to_string(),
                num(v.acceptance),
                v.rejected_singular.to_string(),
            ]
        })
    });
    out.write_csv("points.csv", &header, rows)
}

fn write_report_csv(name: &str, rep: &ExperimentReport, out: &mut Outputs) -> Result<()> {
    let header: Vec<&str> = rep.columns.iter().map(String::as_str).collect();
    out.write_csv(name, &header, rep.rows.iter().map(|r| r.iter().map(|x| num(*x)).collect()))
}

fn write_ratio_fits(
    table: &ScalingTable,
    s_list: &[f64],
    expected: impl Fn(f64) -> f64,
    delta: f64,
    out: &mut Outputs,
) -> Result<Vec<Value>> {
    let mut fits = Vec::new();
    for &s in s_list {
        let mut rep = ratio_report(table, s, expected(s))?;
        rep.set_config("delta", delta);
        let file = format!("ratio_s{}.csv", num(s));
        write_report_csv(&file, &rep, out)?;
        fits.push(json!({
            "s": s,
            "slope": rep.fitted_slope,
            "ci": rep.slope_ci,
            "expected_slope": rep.expected_slope,
            "file": file,
            "config": rep.config,
        }));
    }
    Ok(fits)
}

fn run_c3(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let b = cfg.illposed_c3.as_ref().ok_or_else(|| missing("illposed_c3"))?;
    let table = c3_table(&b.lambdas, b.t, b.delta, b.m, b.samples, cfg.seed)?;
    write_points(&table, out)?;
    let fits = write_ratio_fits(&table, &b.s, |s| 0.5 - 2.0 * s, b.delta, out)?;
    out.write_json(
        "summary.json",
        &json!({ "name": table.name, "m": b.m, "t": b.t, "delta": b.delta, "samples": b.samples,
                 "seed": cfg.seed, "lambdas": b.lambdas, "fits": fits }),
    )
}

fn run_radial(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let b = cfg.illposed_radial.as_ref().ok_or_else(|| missing("illposed_radial"))?;
    let table = radial_table(&b.lambdas, b.delta, b.m, b.samples, cfg.seed)?;
    write_points(&table, out)?;
    let fits = write_ratio_fits(&table, &b.s, |s| 0.0 - 2.0 * s, b.delta, out)?;
    out.write_json(
        "summary.json",
        &json!({ "name": table.name, "m": b.m, "delta": b.delta, "samples": b.samples,
                 "seed": cfg.seed, "lambdas": b.lambdas, "fits": fits }),
    )
}

fn run_uniform(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let b = cfg.illposed_uniform.as_ref().ok_or_else(|| missing("illposed_uniform"))?;
    let rep = uniform_continuity_experiment(b.t, &b.n, b.m, b.grid()?, b.tol)?;
    write_report_csv("uniform.csv", &rep, out)?;
    out.write_json("summary.json", &rep)
}

fn run_estimates(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let b = cfg.estimates.as_ref().ok_or_else(|| missing("estimates"))?;
    let pc = b.probe_config(cfg.seed);
    let res = run_probe(&pc)?;
    let rows = res
        .rows
        .iter()
        .map(|r| vec![r.estimate_id.clone(), num(r.mu), num(r.lambda), r.seed.to_string(), num(r.ratio)]);
    out.write_csv("estimates.csv", &["estimate_id", "mu", "lambda", "seed", "ratio"], rows)?;
    let per_id: Vec<Value> = estimate_ids(pc.probe)
        .iter()
        .map(|id| {
            json!({
                "estimate_id": id,
                "spread": res.spread(id),
                "slope": res.slope(id).ok(),
                "maxima": res.maxima_for(id),
            })
        })
        .collect();
    out.write_json(
        "summary.json",
        &json!({ "probe": pc.probe, "expected_slope": pc.probe.expected_slope(), "config": pc, "estimates": per_id }),
    )
}

/// Name of the manifest file inside an output directory.
pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join(MANIFEST)
}
