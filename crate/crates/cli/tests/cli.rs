use std::fs;
use std::path::Path;
use std::process::Command;

use katsim_cli::config::DEFAULT_TOL;
use katsim_cli::{run, validate, CliError, Overrides, Scenario, ScenarioConfig};

const CHEAP: &str = r#""cutoffs": {"kpo": 18, "cavity": 6, "kerr_levels": 2}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_katsim"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn defaults_resolve_to_the_standard_parameters() {
    let c = ScenarioConfig::parse(r#"{"scenario": "sweep_timing"}"#).unwrap();
    let p = c.system_params().unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    assert_eq!(p.alpha, 2.0);
    assert!((p.kerr - 20.0 * tau).abs() < 1e-12);
    assert!((p.omega_p - 4.0 * p.kerr).abs() < 1e-9);
    assert!((p.delta - 8.0 * tau).abs() < 1e-12);
    assert_eq!(p.zeta, p.delta);
    assert!((p.zeta * p.gate_time - tau).abs() < 1e-12);
    let r = c.resolved();
    assert_eq!(r.n_list.as_deref(), Some(&[1, 2, 4, 8][..]));
    assert_eq!(r.grid.unwrap().values().len(), 41);
    assert_eq!(r.tol, Some(DEFAULT_TOL));
}

#[test]
fn frequencies_respect_the_angular_flag() {
    let c = ScenarioConfig::parse(
        r#"{"scenario": "trajectory", "params": {"coupling": {"f_MHz": 6.0, "angular": false},
            "kerr": {"f_MHz": 20.0, "angular": true}}}"#,
    )
    .unwrap();
    let p = c.system_params().unwrap();
    assert_eq!(p.coupling, 6.0);
    assert_eq!(p.delta, 48.0);
}

#[test]
fn unknown_fields_are_rejected() {
    for text in [
        r#"{"scenario": "truth_table", "bogus": 1}"#,
        r#"{"scenario": "truth_table", "params": {"K": 1}}"#,
        r#"{"scenario": "truth_table", "params": {"kerr": {"f_MHz": 20}}}"#,
        r#"{"scenario": "fig9"}"#,
    ] {
        let e = ScenarioConfig::parse(text).unwrap_err();
        assert!(matches!(e, CliError::Parse(_)), "{text}");
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 1"), "{e}");
    }
}

#[test]
fn validate_reports_physical_values() {
    let lines = validate(&ScenarioConfig::new(Scenario::TruthTable)).unwrap();
    let delta = lines.iter().find(|l| l.starts_with("delta")).unwrap();
    assert!(delta.contains("2π·8.000000 MHz"), "{delta}");
    assert!(delta.contains("5.026548e7 rad/s"), "{delta}");
    assert_eq!(lines.last().unwrap(), "valid");
    assert!(!lines.iter().any(|l| l.starts_with("warning")));
}

#[test]
fn validate_names_broken_invariants() {
    let c = ScenarioConfig::parse(r#"{"scenario": "truth_table", "params": {"omega_p": {"f_MHz": 50, "angular": true}}}"#)
        .unwrap();
    let e = validate(&c).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("omega_p"), "{e}");
    let c = ScenarioConfig::parse(r#"{"scenario": "truth_table", "tol": 1e-3}"#).unwrap();
    assert!(validate(&c).unwrap_err().to_string().contains("tol"));
}

#[test]
fn small_cavity_cutoff_warns() {
    let c = ScenarioConfig::parse(
        r#"{"scenario": "truth_table", "params": {"cutoffs": {"kpo": 18, "cavity": 2, "kerr_levels": 8}}}"#,
    )
    .unwrap();
    let lines = validate(&c).unwrap();
    let w = lines.iter().find(|l| l.starts_with("warning")).expect("warning");
    assert!(w.contains("displacement amplitude 1.000 needs >= 6 levels"), "{w}");
    assert_eq!(lines.last().unwrap(), "valid");
}

#[test]
fn truth_table_has_four_rows_per_model() {
    let dir = tempfile::tempdir().unwrap();
    let c = ScenarioConfig::parse(&format!(r#"{{"scenario": "truth_table", "params": {{{CHEAP}}}}}"#)).unwrap();
    let r = run(&c, &Overrides { out: Some(dir.path().into()), workers: Some(1), tol: None }).unwrap();
    assert_eq!(r.rows, 12);
    let text = fs::read_to_string(&r.csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "input_label,model,fidelity");
    for model in ["ideal", "effective", "full"] {
        assert_eq!(text.lines().filter(|l| l.contains(&format!(",{model},"))).count(), 4);
    }
}

#[test]
fn timing_sweep_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let c = ScenarioConfig::parse(&format!(r#"{{"scenario": "sweep_timing", "params": {{{CHEAP}}}}}"#)).unwrap();
    let r = run(&c, &Overrides { out: Some(dir.path().into()), workers: Some(2), tol: Some(1e-7) }).unwrap();
    assert_eq!(r.rows, 164);
    assert_eq!(data_rows(&r.csv), 164);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&r.manifest).unwrap()).unwrap();
    assert_eq!(manifest["tol"], 1e-7);
    assert_eq!(manifest["workers"], 2);
    assert_eq!(manifest["run_info"]["integrator"]["tol"], 1e-7);
    assert_eq!(manifest["run_info"]["params_fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn populations_shape() {
    let dir = tempfile::tempdir().unwrap();
    let c = ScenarioConfig::parse(&format!(r#"{{"scenario": "populations", "N_list": [1], "params": {{{CHEAP}}}}}"#))
        .unwrap();
    let r = run(&c, &Overrides { out: Some(dir.path().into()), ..Default::default() }).unwrap();
    let text = fs::read_to_string(&r.csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "N,t_ns,label,population");
    assert_eq!(text.lines().filter(|l| l.contains(",C+C+,")).count(), 400);
    assert_eq!(text.lines().filter(|l| l.contains(",C-C-,")).count(), 400);
}

#[test]
fn decoherence_manifest_pins_rate_units() {
    let dir = tempfile::tempdir().unwrap();
    let c = ScenarioConfig::parse(
        r#"{"scenario": "sweep_kappa", "N_list": [1], "grid": {"lo": 0.0, "hi": 0.1, "points": 2},
            "params": {"cutoffs": {"kpo": 18, "cavity": 4, "kerr_levels": 2}}}"#,
    )
    .unwrap();
    let r = run(&c, &Overrides { out: Some(dir.path().into()), ..Default::default() }).unwrap();
    let text = fs::read_to_string(&r.csv).unwrap();
    assert!(text.starts_with("N,kappa_MHz,gamma_MHz,fidelity\n1,0e0,0e0,"));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&r.manifest).unwrap()).unwrap();
    assert_eq!(manifest["rate_units"], "plain");
    assert_eq!(manifest["run_info"]["rate_units"], "plain");
    assert!(!r.warnings.is_empty());
}

#[test]
fn manifest_round_trip_reproduces_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tt.json",
        &format!(r#"{{"scenario": "truth_table", "models": ["effective", "full"], "params": {{{CHEAP}}}}}"#),
    );
    let first = dir.path().join("first");
    let st = bin().args(["run", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()]).output().unwrap().status;
    assert!(st.success());
    let second = dir.path().join("second");
    let manifest = first.join("manifest.json");
    let st = bin().args(["run", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]).output().unwrap().status;
    assert!(st.success());
    let a = fs::read(first.join("truth_table.csv")).unwrap();
    let b = fs::read(second.join("truth_table.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"scenario\": \"truth_table\",\n \"extra\": true}");
    let out = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown field `extra`") && err.contains("line 2"), "{err}");

    let missing = dir.path().join("nope.json");
    assert_eq!(bin().args(["validate", missing.to_str().unwrap()]).output().unwrap().status.code(), Some(2));

    // a 6-level KPO cannot hold the α = 2 cats
    let trunc = write(dir.path(), "trunc.json", r#"{"scenario": "populations", "params": {"cutoffs": {"kpo": 6, "cavity": 6}}}"#);
    let out = bin().args(["run", trunc.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row N=1"));

    let ok = write(dir.path(), "ok.json", r#"{"scenario": "trajectory"}"#);
    let out = bin().args(["validate", ok.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));
}

#[test]
fn worker_count_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tr.json", r#"{"scenario": "trajectory", "N_list": [1]}"#);
    let out_dir = dir.path().join("o");
    let st = bin()
        .env("KATSIM_THREADS", "3")
        .args(["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["workers"], 3);
    assert_eq!(data_rows(&out_dir.join("trajectory.csv")), 2 * 513);

    let st = bin().env("KATSIM_THREADS", "zero").args(["run", cfg.to_str().unwrap()]).output().unwrap().status;
    assert_eq!(st.code(), Some(2));
}
