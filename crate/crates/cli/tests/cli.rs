use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ndeig(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ndeig"))
        .args(args)
        .current_dir(dir)
        .env_remove("NDEIG_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eigen_prints_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(&["eigen", "--n", "1", "--k", "1", "--l", "0"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "alpha=0.25\nbeta=0.25\np_crit=5\n");

    let json = stdout_json(&ndeig(&["eigen", "--n", "1", "--l", "2", "--format", "json"], dir.path()));
    assert_eq!(json["alpha"], 0.5);
    assert_eq!(json["config"]["command"], "eigen");
}

#[test]
fn limit_l2_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(&["limit", "--l", "2", "--zeros", "10"], dir.path());
    assert!(out.status.success());
    let json = stdout_json(&out);
    let zeros: Vec<f64> = serde_json::from_value(json["zeros"].clone()).unwrap();
    assert!(zeros.len() >= 10);
    for w in zeros[2..].windows(2) {
        assert!((w[1] - w[0] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn shoot_writes_files_and_check_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(
        &["shoot", "--n", "3", "--l", "0", "--y0", "-10", "--ymax", "60", "--out", "prof.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("prof.csv")).unwrap();
    assert!(csv.starts_with("y,Y,Yp\n"));
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("prof.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n"], 3.0);
    assert!(meta["zeros"].as_array().unwrap().len() >= 5);
    assert!(!meta["extrema"].as_array().unwrap().is_empty());

    let diag_path = dir.path().join("prof.diag.json");
    let first = fs::read_to_string(&diag_path).unwrap();
    let out = ndeig(&["check", "--profile", "prof.csv"], dir.path());
    assert!(out.status.success());
    let second = fs::read_to_string(&diag_path).unwrap();
    assert_eq!(first, second);
    assert_eq!(stdout_json(&out)["passed"], true);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ndeig(&["eigen", "--n", "1", "--l", "7"], dir.path()).status.code(), Some(2));
    assert_eq!(
        ndeig(&["shoot", "--n", "1", "--y0", "-10", "--delta", "1"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(ndeig(&["vss", "--n", "0.6", "--p", "1.2"], dir.path()).status.code(), Some(2));
    assert_eq!(ndeig(&["eigen", "--n", "abc", "--l", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn vss_non_convergence_exit_3_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(
        &["vss", "--n", "0.6", "--p", "5", "--length", "0.5", "--closure", "zero", "--name", "short"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let json = stdout_json(&out);
    assert_eq!(json["converged"], false);
    assert!(json["residual_norm"].as_f64().unwrap() > 1e-6);
    for f in ["short.csv", "short.meta.json", "short.diag.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn vss_reports_required_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(&["vss", "--n", "0.6", "--p", "5", "--length", "8", "--step", "0.02"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = stdout_json(&out);
    for key in ["n", "p", "alpha", "beta", "residual_norm", "hump_amplitude", "converged"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert_eq!(json["converged"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_ndeig"))
        .args(["shoot", "--n", "1", "--ymax", "20", "--name", "env"])
        .current_dir(dir.path())
        .env("NDEIG_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("env.csv").exists());
    assert!(target.join("env.meta.json").exists());
}

#[test]
fn sweep_keeps_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(&["shoot", "--sweep", "3,1,2", "--ymax", "20", "--name", "sw"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = stdout_json(&out);
    let ns: Vec<f64> = rows.as_array().unwrap().iter().map(|r| r["n"].as_f64().unwrap()).collect();
    assert_eq!(ns, vec![3.0, 1.0, 2.0]);
    assert!(dir.path().join("sw_n1.csv").exists());
}

#[test]
fn compare_linear_l0() {
    let dir = tempfile::tempdir().unwrap();
    let out = ndeig(&["compare-linear", "--l", "0", "--n-list", "0.7,0.5,0.3,0.2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["strictly_decreasing"], true);
}
