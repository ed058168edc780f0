use std::path::PathBuf;
use std::process::ExitCode;

use bslab::estimates::ProbeKind;
use bslab_cli::config::{C3Block, EstimatesBlock, GroundStateMethod, RadialBlock, UniformBlock};
use bslab_cli::{load_config, replay, run, CliError, Command, Manifest, RunConfig};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bslab", version, about = "Pseudo-spectral lab for the L2-critical boson star equation")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reject unknown configuration keys instead of warning.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Time-evolve initial data (needs an [evolve] block).
    Evolve {
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// Solve for a ground state.
    Groundstate {
        #[arg(long)]
        mass_param: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_parser = parse_method)]
        method: Option<GroundStateMethod>,
        #[arg(long)]
        n_r: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Cube-pair scaling of the third Picard iterate.
    IllposedC3 {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_parser = parse_count)]
        samples: Option<usize>,
        #[arg(long)]
        m: Option<f64>,
    },
    /// Annulus scaling with t = delta/lambda.
    IllposedRadial {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_parser = parse_count)]
        samples: Option<usize>,
        #[arg(long)]
        m: Option<f64>,
    },
    /// Soliton-pair uniform continuity experiment.
    IllposedUniform {
        #[arg(long)]
        t: Option<f64>,
        /// Range `a:b` (inclusive) or comma list.
        #[arg(long, value_parser = parse_range)]
        n: Option<NList>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        n_r: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Randomized probes of the space-time estimates.
    Estimates {
        #[arg(long, value_parser = parse_probe)]
        probe: Option<ProbeKind>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        mus: Option<Vec<f64>>,
        #[arg(long)]
        b: Option<f64>,
    },
    /// Re-run a manifest and compare output checksums.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn parse_count(s: &str) -> Result<usize, String> {
    let x: f64 = s.parse().map_err(|e| format!("'{s}': {e}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
        Ok(x as usize)
    } else {
        Err(format!("'{s}' is not a nonnegative integer"))
    }
}

#[derive(Clone)]
struct NList(Vec<usize>);

fn parse_range(s: &str) -> Result<NList, String> {
    let int = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"));
    match s.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (int(a)?, int(b)?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            Ok(NList((a..=b).collect()))
        }
        None => s.split(',').map(int).collect::<Result<_, _>>().map(NList),
    }
}

fn parse_probe(s: &str) -> Result<ProbeKind, String> {
    s.parse().map_err(|e: bslab::LabError| e.to_string())
}

fn parse_method(s: &str) -> Result<GroundStateMethod, String> {
    match s {
        "petviashvili" => Ok(GroundStateMethod::Petviashvili),
        "constrained" => Ok(GroundStateMethod::Constrained),
        _ => Err(format!("unknown method '{s}' (petviashvili|constrained)")),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("BSLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("BSLAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn report(m: &Manifest, path: &std::path::Path) {
    println!(
        "{}",
        json!({
            "subcommand": m.subcommand,
            "manifest": path,
            "outputs": m.outputs.len(),
            "wall_clock_seconds": m.wall_clock_seconds,
        })
    );
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    if let Cmd::Replay { manifest } = &cli.cmd {
        let (m, path) = replay(manifest, cli.output_dir.as_deref())?;
        report(&m, &path);
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(p) => {
            let parsed = load_config(p, cli.strict)?;
            for k in &parsed.unknown_keys {
                eprintln!("{}", json!({ "warning": "unknown configuration key", "key": k }));
            }
            parsed.config
        }
        None => RunConfig::default(),
    };
    set(&mut cfg.output_dir, cli.output_dir);
    set(&mut cfg.seed, cli.seed);
    cfg.strict |= cli.strict;
    let cmd = match cli.cmd {
        Cmd::Evolve { snapshot_every } => {
            let b = cfg
                .evolve
                .as_mut()
                .ok_or_else(|| CliError::Usage("evolve needs --config with an [evolve] block".into()))?;
            set(&mut b.snapshot_every, snapshot_every);
            Command::Evolve
        }
        Cmd::Groundstate { mass_param, tol, method, n_r, r_max } => {
            let b = cfg.groundstate.get_or_insert_with(Default::default);
            set(&mut b.mass_param, mass_param);
            set(&mut b.tol, tol);
            set(&mut b.method, method);
            set(&mut b.n_r, n_r);
            set(&mut b.r_max, r_max);
            Command::GroundState
        }
        Cmd::IllposedC3 { s, lambdas, delta, t, samples, m } => {
            let b = cfg.illposed_c3.get_or_insert_with(C3Block::default);
            set(&mut b.s, s);
            set(&mut b.lambdas, lambdas);
            set(&mut b.delta, delta);
            set(&mut b.t, t);
            set(&mut b.samples, samples);
            set(&mut b.m, m);
            Command::IllposedC3
        }
        Cmd::IllposedRadial { s, lambdas, delta, samples, m } => {
            let b = cfg.illposed_radial.get_or_insert_with(RadialBlock::default);
            set(&mut b.s, s);
            set(&mut b.lambdas, lambdas);
            set(&mut b.delta, delta);
            set(&mut b.samples, samples);
            set(&mut b.m, m);
            Command::IllposedRadial
        }
        Cmd::IllposedUniform { t, n, m, n_r, r_max } => {
            let b = cfg.illposed_uniform.get_or_insert_with(UniformBlock::default);
            set(&mut b.t, t);
            set(&mut b.n, n.map(|l| l.0));
            set(&mut b.m, m);
            set(&mut b.n_r, n_r);
            set(&mut b.r_max, r_max);
            Command::IllposedUniform
        }
        Cmd::Estimates { probe, seeds, mus, b: bval } => {
            if cfg.estimates.is_none() {
                let p = probe.ok_or_else(|| CliError::Usage("estimates needs --probe or an [estimates] block".into()))?;
                cfg.estimates = Some(EstimatesBlock::new(p));
            }
            let b = cfg.estimates.as_mut().expect("just set");
            set(&mut b.probe, probe);
            if seeds.is_some() {
                b.seeds = seeds;
            }
            if mus.is_some() {
                b.mus = mus;
            }
            if bval.is_some() {
                b.b = bval;
            }
            Command::Estimates
        }
        Cmd::Replay { .. } => unreachable!(),
    };
    let (m, path) = run(cmd, &cfg)?;
    report(&m, &path);
    Ok(())
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code() as u8)
        }
    }
}
