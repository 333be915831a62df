use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn dirackit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirackit"))
        .args(args)
        .env_remove("DIRACKIT_TOL")
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = dirackit(args);
    let report = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), report)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_certified_partial_structure() {
    let (code, r) = run_json(&["verify", path(&data("partial_ff0.json"))]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "Certified");
    assert_eq!(r["checks"]["graph_recovery"], true);
    assert_eq!(r["kernel_report"]["D_cap_E"]["basis"].as_array().unwrap().len(), 2);
}

#[test]
fn counterexamples_exit_one_with_diagnosis() {
    let (code, r) = run_json(&["verify", path(&data("separation_fails.json"))]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "IsotropicOnly");
    assert_eq!(r["diagnostics"]["failed_hypothesis"], "separation hypothesis fails");
    let (code, r) = run_json(&["construct", path(&data("biannihilator_fails.json"))]);
    assert_eq!(code, 1);
    assert_eq!(r["diagnostics"]["failed_hypothesis"], "biannihilator condition fails");
}

#[test]
fn construct_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = dirackit(&["construct", path(&data("symplectic_plane.json")), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["status"], "Certified");
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn schema_violation_names_the_pointer() {
    let o = dirackit(&["verify", path(&data("negative_dim.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/space/dimE"));
}

#[test]
fn malformed_json_exits_two() {
    let o = dirackit(&["verify", path(&data("malformed.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = dirackit(&["verify", "/nonexistent/spec.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rolling_disk_distribution_is_not_involutive() {
    let (code, r) = run_json(&["involutivity", path(&data("rolling_disk_distribution.json")), "--samples", "10"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"], "NotInvolutive");
    assert_eq!(r["distribution_closed"], false);
    assert_eq!(r["pointwise_certified"], true);
}

#[test]
fn involutive_fields_exit_zero() {
    for f in ["involutive_distribution.json", "constant_poisson.json"] {
        let (code, r) = run_json(&["involutivity", path(&data(f)), "--samples", "100"]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(r["verdict"], "Involutive");
    }
}

#[test]
fn non_closed_two_form_has_unit_witness() {
    let (code, r) = run_json(&["involutivity", path(&data("omega_witness.json")), "--samples", "5"]);
    assert_eq!(code, 1);
    assert_eq!(r["witness"]["value"].as_f64().unwrap(), 1.0);
}

#[test]
fn reports_are_byte_identical_for_a_fixed_seed() {
    let args = |seed: &'static str| {
        vec![
            "involutivity".to_string(),
            data("rolling_disk_distribution.json").display().to_string(),
            "--samples".into(),
            "7".into(),
            "--seed".into(),
            seed.into(),
        ]
    };
    let run = |a: Vec<String>| dirackit(&a.iter().map(String::as_str).collect::<Vec<_>>()).stdout;
    assert_eq!(run(args("42")), run(args("42")));
    assert_ne!(run(args("42")), run(args("43")));
}

#[test]
fn courant_bracket_example() {
    let (code, r) = run_json(&["bracket", path(&data("courant_pair.json")), "--at", "1,-2,0.5"]);
    assert_eq!(code, 0);
    assert_eq!(r["bracket"]["form"]["components"]["2"]["(0,0,0)"], -1.0);
    assert_eq!(r["bracket"]["vector"]["components"], serde_json::json!({}));
    assert_eq!(r["at"]["bracket"]["form"][2], -1.0);
    let o = dirackit(&["bracket", path(&data("courant_pair.json")), "--at", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn limits_validation() {
    let (code, r) = run_json(&["limits", path(&data("ascending_symplectic.json"))]);
    assert_eq!(code, 0);
    assert!(r["coherence"]["max_omega_residual"].as_f64().unwrap() <= 1e-12);
    let (code, r) = run_json(&["limits", path(&data("ascending_broken.json"))]);
    assert_eq!(code, 1);
    assert_eq!(r["validation"]["valid"], false);
}

#[test]
fn tolerance_override() {
    let o = Command::new(env!("CARGO_BIN_EXE_dirackit"))
        .args(["construct", path(&data("symplectic_plane.json"))])
        .env("DIRACKIT_TOL", "1e-7")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["tol"], 1e-7);
    let (_, r) = run_json(&["construct", path(&data("symplectic_plane.json")), "--tol", "1e-6"]);
    assert_eq!(r["tol"], 1e-6);
    let o = Command::new(env!("CARGO_BIN_EXE_dirackit"))
        .args(["construct", path(&data("symplectic_plane.json"))])
        .env("DIRACKIT_TOL", "tiny")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_rolling_disk_acceptance_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let (code, r) = run_json(&["simulate", "--system", "rolling-disk", "--out", path(&csv)]);
    assert_eq!(code, 0);
    assert!(r["diagnostics"]["max_energy_drift"].as_f64().unwrap() <= 1e-8);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x,y,theta,phi,p_x,p_y,p_theta,p_phi,energy,res_constraint,res_dirac,lambda1,lambda2"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10001);
    let e0 = rows[0][9];
    assert!(rows.iter().all(|r| (r[9] - e0).abs() <= 1e-8));
    let last = rows.last().unwrap();
    assert!((last[0] - 10.0).abs() < 1e-9);
    assert!((last[1] - 2.0 * 5f64.sin()).abs() < 1e-6);
}

#[test]
fn simulate_spec_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lc.csv");
    let rep = dir.path().join("lc.json");
    let o = dirackit(&["simulate", path(&data("lc_circuit.json")), "--out", path(&csv), "--report", path(&rep)]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["system"], "lc-circuit");
    assert_eq!(r["passed"], true);
    let o = dirackit(&["simulate", "--system", "pendulum"]);
    assert_eq!(o.status.code(), Some(4));
    let o = dirackit(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
}
