use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quasiconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasiconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"{
  "name": "small_front",
  "spec": {"variant": "cubic_bistable", "roots": [-1.0, 0.0, 1.0]},
  "grid": {"half_width": 20.0, "nodes": 401},
  "initial": {"family": "front", "alpha": 1.0, "beta": -1.0, "steepness": 0.5},
  "solver": {"dt": 0.01, "t_end": 20.0, "snapshot_every": 1.0},
  "diagnostics": {"companions": [{"kind": "zero"}, {"kind": "orbit", "u": 0.0, "v": 0.7071067811865476}]}
}"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn even_node_count_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("401", "400"));
    let out = dir.path().join("run");
    let o = quasiconv(&["--config", &cfg, "--out", out.to_str().unwrap(), "simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.nodes"));
}

#[test]
fn unknown_field_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"seed\"", "").replace("\"name\"", "\"nmae\""));
    let o = quasiconv(&["--config", &cfg, "simulate"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nmae") && err.contains("line"), "{err}");
}

#[test]
fn simulate_is_byte_stable_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = quasiconv(&["--config", &cfg, "--out", out.to_str().unwrap(), "simulate"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in [
        "run_meta.json",
        "snapshots.csv",
        "theta.csv",
        "zeros.csv",
        "tracks.csv",
        "case.json",
        "energy.csv",
        "omega_profiles.csv",
        "omega_report.json",
    ] {
        let x = fs::read(a.join(name)).unwrap_or_else(|_| panic!("missing {name}"));
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("run_meta.json")).unwrap()).unwrap();
    assert!((meta["kappa"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert!(meta["kappa_policy"].as_str().unwrap().starts_with("default"));
    assert_eq!(meta["hypothesis_ok"], true);
    assert!(meta["omega"]["cluster_tol"].is_number());
    assert!(meta["zero_tolerances"]["value"].is_number());
}

#[test]
fn diagnose_and_omega_reuse_a_stored_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = dir.path().join("run");
    let run_s = run.to_str().unwrap();
    assert!(quasiconv(&["--config", &cfg, "--out", run_s, "simulate"]).status.success());
    let o = quasiconv(&["diagnose", "--run", run_s, "--zeros", "companion=zero", "--interval", "-5,5", "--case"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("zeros vs zero on (-5, 5)"), "{text}");
    let zeros = fs::read_to_string(run.join("zeros.csv")).unwrap();
    assert!(zeros.lines().skip(1).all(|l| l.starts_with("zero,-5,5,")));

    let o = quasiconv(&["omega", "--run", run_s, "--window", "4", "--late", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(run.join("omega_report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["window"], 4.0);
    assert_eq!(report["config"]["late_fraction"], 0.2);
}

#[test]
fn phase_classifies_the_standing_wave() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"variant": "polynomial", "coeffs": [0.0, 1.0, 0.0, -1.0]}"#).unwrap();
    let out = dir.path().join("phase");
    let o = quasiconv(&[
        "--out",
        out.to_str().unwrap(),
        "phase",
        "--spec",
        spec.to_str().unwrap(),
        "--start",
        "0,0.7071067811865476",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("heteroclinic"));
    let csv = fs::read_to_string(out.join("phase.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("heteroclinic"));
    assert!(fs::read_to_string(out.join("profiles.csv")).unwrap().lines().count() > 1000);
}

#[test]
fn verify_phase_suite_passes() {
    let o = quasiconv(&["verify", "--suite", "phase"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("PASS A1") && text.contains("PASS A2"), "{text}");
}

#[test]
fn verify_rejects_unknown_suite() {
    let o = quasiconv(&["verify", "--suite", "phases"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_directory_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = quasiconv(&["--out", out.to_str().unwrap(), "--threads", "2", "sweep", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("small_front").join("omega_report.json").exists());
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    assert!(summary.contains("small_front,ok"));
}
