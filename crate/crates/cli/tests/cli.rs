use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use bslab::spectral::CoulombBackend;
use bslab_cli::config::{C3Block, EvolveBlock, InitialData, UniformBlock};
use bslab_cli::{parse_config, replay, run, CliError, Command, Manifest, RunConfig};
use proptest::prelude::*;

const BIN: &str = env!("CARGO_BIN_EXE_bslab");

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn evolve_cfg(dir: &Path, initial: InitialData) -> RunConfig {
    let mut b = EvolveBlock::minimal(1.0, 1e-2, 0.2, CoulombBackend::RadialNewton);
    b.n_r = 256;
    b.r_max = 16.0;
    b.initial = initial;
    RunConfig { output_dir: dir.to_path_buf(), evolve: Some(b), ..RunConfig::default() }
}

#[test]
fn minimal_evolve_config_parses() {
    let text = "[evolve]\nm = 1.0\ndt = 1e-2\nt_final = 1.0\nbackend = \"radial_newton\"\n";
    let p = parse_config(text, true).unwrap();
    let b = p.config.evolve.unwrap();
    assert_eq!((b.m, b.dt, b.t_final, b.backend), (1.0, 1e-2, 1.0, CoulombBackend::RadialNewton));
    assert_eq!(b.initial, InitialData::Gaussian { amplitude: 0.2, width: 2.0 });
    assert!(p.unknown_keys.is_empty());
}

#[test]
fn constraint_errors_name_the_invariant() {
    let e = parse_config("[estimates]\nprobe = \"str1\"\nb = 0.4\n", false).unwrap_err();
    assert_eq!(e.code(), 2);
    assert!(e.to_string().contains("b > 1/2"), "{e}");
    assert!(e.to_string().starts_with("estimates"), "{e}");
    let e = parse_config("[evolve]\nm = 1\ndt = 0.0\nt_final = 1\nbackend = \"torus_fft\"\n", false).unwrap_err();
    assert!(e.to_string().contains("dt > 0"), "{e}");
    assert!(e.to_string().starts_with("evolve.dt"), "{e}");
    let e = parse_config("[illposed_c3]\nlambdas = [64, 128, 256]\n", false).unwrap_err();
    assert!(e.to_string().contains("at least 4"), "{e}");
    let e = parse_config("[illposed_radial]\nlambdas = [64, 128, 200, 512]\n", false).unwrap_err();
    assert!(e.to_string().contains("geometric"), "{e}");
}

#[test]
fn parse_errors_report_position() {
    let e = parse_config("seed = 1\n[evolve]\nm = = 1\n", false).unwrap_err();
    match e {
        CliError::Parse { line, column, .. } => assert_eq!((line, column), (3, 5)),
        other => panic!("{other}"),
    }
    let e = parse_config("seed = \"x\"\n", false).unwrap_err();
    assert!(matches!(e, CliError::Parse { line: 1, .. }), "{e}");
}

#[test]
fn strict_mode_rejects_unknown_keys() {
    let text = "sed = 1\n[groundstate]\nn_r = 512\nr_max = 32\ntoll = 1e-9\n";
    let p = parse_config(text, false).unwrap();
    assert_eq!(p.unknown_keys, vec!["sed".to_string(), "groundstate.toll".to_string()]);
    match parse_config(text, true).unwrap_err() {
        CliError::UnknownKeys(k) => assert_eq!(k.len(), 2),
        other => panic!("{other}"),
    }
    assert!(parse_config(&format!("strict = true\n{text}"), false).is_err());
    // typos inside the tagged initial-data table are always errors
    let bad = "[evolve]\nm = 1\ndt = 0.1\nt_final = 1\nbackend = \"radial_newton\"\ninitial = { kind = \"zero\", amp = 1 }\n";
    assert!(parse_config(bad, false).is_err());
}

#[test]
fn evolve_zero_data_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (m, _) = run(Command::Evolve, &evolve_cfg(dir.path(), InitialData::Zero {})).unwrap();
    let (header, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "mass", "energy", "linf", "l2"]);
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r[1..].iter().all(|x| *x == 0.0)));
    assert!(m.outputs.iter().any(|o| o.path == "final_state.bin"));
}

#[test]
fn outputs_are_reproducible_and_replay_checks_them() {
    let root = tempfile::tempdir().unwrap();
    let init = InitialData::Gaussian { amplitude: 0.3, width: 1.5 };
    let (a, _) = run(Command::Evolve, &evolve_cfg(&root.path().join("a"), init.clone())).unwrap();
    let (b, _) = run(Command::Evolve, &evolve_cfg(&root.path().join("b"), init)).unwrap();
    assert_eq!(a.outputs, b.outputs);
    for o in &a.outputs {
        let bytes = fs::read(root.path().join("a").join(&o.path)).unwrap();
        assert_eq!(bytes.len() as u64, o.bytes);
    }
    let path = root.path().join("a/manifest.json");
    assert_eq!(Manifest::read(&path).unwrap().outputs, a.outputs);
    replay(&path, Some(&root.path().join("r"))).unwrap();

    // a doctored checksum is reported
    let text = fs::read_to_string(&path).unwrap();
    let sum = &a.outputs[0].sha256;
    fs::write(&path, text.replace(sum.as_str(), &"0".repeat(64))).unwrap();
    let e = replay(&path, Some(&root.path().join("r2"))).unwrap_err();
    assert_eq!(e.code(), 8);
    assert!(e.to_string().contains("trajectory.csv differs"), "{e}");
}

#[test]
fn snapshots_reload_as_initial_data() {
    let root = tempfile::tempdir().unwrap();
    let mut cfg = evolve_cfg(&root.path().join("a"), InitialData::Gaussian { amplitude: 0.3, width: 1.5 });
    cfg.evolve.as_mut().unwrap().snapshot_every = 10;
    let (m, _) = run(Command::Evolve, &cfg).unwrap();
    assert_eq!(m.outputs.iter().filter(|o| o.path.starts_with("snapshot_")).count(), 3);
    let mut again = evolve_cfg(&root.path().join("b"), InitialData::File { path: root.path().join("a/final_state.bin") });
    again.evolve.as_mut().unwrap().t_final = 0.1;
    run(Command::Evolve, &again).unwrap();
    let (_, first) = csv_rows(&root.path().join("a/trajectory.csv"));
    let (_, second) = csv_rows(&root.path().join("b/trajectory.csv"));
    assert!((second[0][1] / first.last().unwrap()[1] - 1.0).abs() < 1e-12);
}

#[test]
fn uniform_csv_columns_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        output_dir: dir.path().to_path_buf(),
        illposed_uniform: Some(UniformBlock { n: vec![1, 2, 3, 4], n_r: 2048, r_max: 64.0, ..UniformBlock::default() }),
        ..RunConfig::default()
    };
    run(Command::IllposedUniform, &cfg).unwrap();
    let (header, rows) = csv_rows(&dir.path().join("uniform.csv"));
    assert_eq!(header, ["n", "mu1", "mu2", "cos", "overlap", "norm_sq_sum", "i0", "it"]);
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!(w[1][6] < w[0][6]);
    }
    for r in &rows {
        // the phases are odd multiples of π/2, so I(t) is the sum of masses
        assert!(r[3].abs() < 1e-12);
        assert!((r[7] - r[5]).abs() < 1e-9 * r[5]);
        assert!(r[6] < r[5]);
    }
}

#[test]
fn binary_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[estimates]\nprobe = \"str1\"\nb = 0.4\n").unwrap();
    let out = Proc::new(BIN).args(["--config", cfg.to_str().unwrap(), "estimates"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let line: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"], "config");
    assert_eq!(line["code"], 2);
    assert!(line["message"].as_str().unwrap().contains("b > 1/2"));
}

#[test]
fn binary_flags_override_and_replay_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("c3");
    let status = Proc::new(BIN)
        .env("BSLAB_THREADS", "2")
        .args(["--output-dir", out_dir.to_str().unwrap(), "--seed", "3", "illposed-c3"])
        .args(["--s", "0,0.25", "--lambdas", "16,32,64,128", "--samples", "2e4"])
        .status()
        .unwrap();
    assert!(status.success());
    let m = Manifest::read(&out_dir.join("manifest.json")).unwrap();
    let b = m.config.illposed_c3.as_ref().unwrap();
    assert_eq!((m.config.seed, b.samples, b.s.clone()), (3, 20_000, vec![0.0, 0.25]));
    assert_eq!(m.threads, 2);
    let names: Vec<&str> = m.outputs.iter().map(|o| o.path.as_str()).collect();
    assert_eq!(names, ["points.csv", "ratio_s0.0.csv", "ratio_s0.25.csv", "summary.json"]);
    let out = Proc::new(BIN)
        .env("BSLAB_THREADS", "1")
        .args(["replay", "--manifest", out_dir.join("manifest.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_survives_a_toml_round_trip(
        seed in any::<u32>(),
        delta in 0.05f64..0.9,
        t in 0.01f64..4.0,
        l0 in 8.0f64..64.0,
        samples in 10_000usize..2_000_000,
        s in proptest::collection::vec(-1.0f64..1.0, 1..4),
    ) {
        let c3 = C3Block { s, lambdas: (0..4).map(|k| l0 * 2f64.powi(k)).collect(), delta, t, samples, m: 0.0 };
        let cfg = RunConfig { seed: seed as u64, illposed_c3: Some(c3), ..RunConfig::default() };
        prop_assume!(cfg.validate().is_ok());
        let text = toml::to_string(&cfg).unwrap();
        let back = parse_config(&text, true).unwrap();
        prop_assert_eq!(back.config, cfg);
    }
}
