use std::fs;
use std::path::{Path, PathBuf};

use oldroyd_core::norms::besov_norm;
use oldroyd_core::oldroyd::{make_initial_data, phi_iteration, InitialFamily, InitialSpec, PhysicalParams};
use oldroyd_core::{BesovSpec, Exponent, GridSpec, SpectralField, TimeGrid};
use oldroyd_lab::manifest::{sha256_hex, RunManifest};
use oldroyd_lab::snapshot::write_snapshot;
use oldroyd_lab::{cli, exit};

fn run(args: &[&str]) -> u8 {
    cli::run(std::iter::once("oldroyd").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn save(dir: &Path, name: &str, fields: &[(String, &SpectralField)]) -> PathBuf {
    let path = dir.join(name);
    let mut bytes = Vec::new();
    write_snapshot(&mut bytes, Some(0.0), fields).unwrap();
    fs::write(&path, bytes).unwrap();
    path
}

fn config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.json");
    fs::write(&path, body).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let i = rd.headers().unwrap().iter().position(|h| h == name).unwrap();
    rd.records().map(|r| r.unwrap()[i].to_string()).collect()
}

const SMALL_RUN: &str = r#"{
    "grid": {"dim": 2, "M": 16},
    "time": {"T": 0.2, "dt": 0.05},
    "initial": {"family": "exact_gradient", "amplitude": AMP, "seed": 3}
}"#;

fn small_run(amplitude: &str) -> String {
    SMALL_RUN.replace("AMP", amplitude)
}

#[test]
fn norms_of_a_zero_snapshot_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::new(2, 16).unwrap();
    let z = SpectralField::zeros(&grid);
    let snap = save(dir.path(), "zero.bin", &[("u".into(), &z), ("w".into(), &z)]);
    let out = dir.path().join("out");
    assert_eq!(run(&["norms", s(&snap), "--norm", "1,2,1", "--norm", "0,inf,inf", "--out", s(&out)]), exit::PASS);
    let values = column(&out.join("norms.csv"), "value");
    assert_eq!(values.len(), 4);
    assert!(values.iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn norms_match_the_library_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::new(2, 32).unwrap();
    let u = SpectralField::cosine(&grid, &[1, 0], 1.0);
    let snap = save(dir.path(), "cos.bin", &[("u".into(), &u)]);
    let out = dir.path().join("out");
    assert_eq!(run(&["norms", s(&snap), "--norm", "1,2,1", "--out", s(&out)]), exit::PASS);
    // the CLI sees the field rebuilt from its samples
    let back = SpectralField::from_samples(&grid, &u.to_samples()).unwrap();
    let want = besov_norm(&back, &BesovSpec::new(1.0, Exponent::TWO, Exponent::ONE)).value;
    assert_eq!(column(&out.join("norms.csv"), "value"), vec![format!("{want:e}")]);
}

#[test]
fn missing_and_malformed_snapshots_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["norms", s(&dir.path().join("absent.bin"))]), exit::USAGE);
    let junk = dir.path().join("junk.bin");
    fs::write(&junk, b"{\"dim\": 2}\n").unwrap();
    assert_eq!(run(&["norms", s(&junk)]), exit::USAGE);
}

#[test]
fn zero_amplitude_run_stays_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small_run("0.0"));
    let out = dir.path().join("rest");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]), exit::PASS);
    let values = column(&out.join("norms.csv"), "value");
    assert!(!values.is_empty());
    assert!(values.iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    for r in csv_rows(&out.join("residuals.csv")) {
        assert!(r.iter().skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
    assert_eq!(fs::read_dir(out.join("snapshots")).unwrap().count(), 5);
}

#[test]
fn phi_mode_reports_the_library_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small_run("0.001"));
    let out = dir.path().join("phi");
    assert_eq!(run(&["phi", "--config", s(&cfg), "--out", s(&out)]), exit::PASS);
    let got: Vec<f64> = column(&out.join("contraction.csv"), "distance").iter().map(|v| v.parse().unwrap()).collect();
    assert!(got.windows(2).all(|w| w[1] < w[0]), "{got:?}");

    let grid = GridSpec::new(2, 16).unwrap();
    let (state0, _) = make_initial_data(&InitialSpec::new(InitialFamily::ExactGradient, 1e-3, 3), &grid).unwrap();
    let lib = phi_iteration(&state0, &PhysicalParams::with_viscosity(1.0).unwrap(), &TimeGrid::new(0.2, 0.05, 1).unwrap(), 20, 1e-8).unwrap();
    assert_eq!(got, lib.distances);
}

#[test]
fn coupled_mode_writes_the_cross_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small_run("0.001"));
    let out = dir.path().join("coupled");
    assert_eq!(run(&["simulate", "--mode", "coupled", "--config", s(&cfg), "--out", s(&out)]), exit::PASS);
    let rel = column(&out.join("cross.csv"), "relative");
    assert_eq!(rel.len(), 5);
    // the data satisfy the deformation constraint only to second order
    assert!(rel.iter().all(|v| v.parse::<f64>().unwrap() < 1e-3));
}

#[test]
fn solver_abort_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let body = small_run("200.0").replace("\"T\": 0.2", "\"T\": 2.0").replace("\"dt\": 0.05", "\"dt\": 0.5");
    let cfg = config(dir.path(), &body);
    let out = dir.path().join("abort");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]), exit::SOLVER_ABORT);
    let m: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.exit_code, exit::SOLVER_ABORT);
    assert!(m.status.starts_with("aborted"));
    assert!(out.join("norms.csv").exists());
}

#[test]
fn schema_violations_and_unknown_suites_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"grid": {"dim": 2, "M": 16}, "time": {"T": 1}}"#);
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&dir.path().join("x"))]), exit::USAGE);
    let cfg = config(dir.path(), &small_run("0.1").replace("\"M\": 16", "\"M\": 20"));
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&dir.path().join("y"))]), exit::USAGE);
    assert_eq!(run(&["simulate"]), exit::USAGE);
    assert_eq!(run(&["verify", "nonsense", "--out", s(&dir.path().join("z"))]), exit::USAGE);
    assert_eq!(run(&["frobnicate"]), exit::USAGE);
}

#[test]
fn verify_suites_pass_at_default_size() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["bernstein", "scaling"] {
        let out = dir.path().join(suite);
        assert_eq!(run(&["verify", suite, "--out", s(&out)]), exit::PASS, "{suite}");
        let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
        assert!(summary.as_array().unwrap().iter().all(|e| e["passed"] == true));
    }
}

#[test]
fn tiny_ensembles_are_a_soft_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("all");
    assert_eq!(run(&["verify", "all", "--count", "2", "--points", "32", "--out", s(&out)]), exit::SOFT_FAIL);
    for r in csv_rows(&out.join("ratios.csv")) {
        assert_eq!(&r[7], "false", "{r:?}");
    }
    assert!(out.join("smallness.csv").exists());
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small_run("0.01"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&a)]), exit::PASS);
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&b)]), exit::PASS);
    for name in ["norms.csv", "residuals.csv", "snapshots/state_00004.bin"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn manifest_hashes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small_run("0.01"));
    let out = dir.path().join("m");
    assert_eq!(run(&["simulate", "--seed", "9", "--config", s(&cfg), "--out", s(&out)]), exit::PASS);
    let m: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.exit_code, exit::PASS);
    assert_eq!(m.config_hash, sha256_hex(&fs::read(out.join("config.json")).unwrap()));
    let copy: serde_json::Value = serde_json::from_slice(&fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(copy["initial"]["seed"], 9);
    assert!(m.files.iter().all(|f| f.path != "manifest.json"));
    assert_eq!(m.files.len(), 3 + 5);
    for f in &m.files {
        let bytes = fs::read(out.join(&f.path)).unwrap();
        assert_eq!(f.sha256, sha256_hex(&bytes), "{}", f.path);
        assert_eq!(f.bytes, bytes.len() as u64);
    }
}
