use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noisy_sysid::estimators::Estimate;
use noisy_sysid::system::AssumptionReport;
use tempfile::TempDir;

fn sysid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sysid")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SCALAR: &str = r#"{
  "A": {"kind": "dense", "rows": 1, "cols": 1, "data": [0.5]},
  "B": {"kind": "dense", "rows": 1, "cols": 1, "data": [1.0]},
  "sigma_w": {"kind": "identity", "dim": 1},
  "sigma_u": {"kind": "identity", "dim": 1},
  "sigma_eta": {"kind": "identity", "dim": 1}
}"#;

#[test]
fn simulate_then_estimate_every_method() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "sys.json", SCALAR);
    let traj = dir.path().join("traj.csv");
    let traj = traj.to_str().unwrap();
    let out = sysid(&["simulate", "--system", &sys, "--T", "2000", "--seed", "42", "--out", traj]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(traj).unwrap();
    assert!(text.starts_with("t,x_0,xhat_0,u_0\n"));
    assert_eq!(text.lines().count(), 2002);

    let again = dir.path().join("again.csv");
    sysid(&["simulate", "--system", &sys, "--T", "2000", "--seed", "42", "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(traj).unwrap(), fs::read(&again).unwrap());

    let sigma = write(dir.path(), "sigma.json", r#"{"kind": "identity", "dim": 1}"#);
    for (method, extra) in [("ls", vec![]), ("iv", vec![]), ("bc", vec!["--sigma-eta-hat", &sigma]), ("hokalman", vec!["--k", "3"])] {
        let est_path = dir.path().join(format!("{method}.json"));
        let mut args = vec!["estimate", "--method", method, "--traj", traj, "--out", est_path.to_str().unwrap()];
        args.extend(extra);
        let out = sysid(&args);
        assert_eq!(out.status.code(), Some(0), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let est: Estimate = serde_json::from_str(&fs::read_to_string(&est_path).unwrap()).unwrap();
        let printed: Estimate = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(est, printed);
        assert_eq!((est.n, est.m), (1, 1));
    }
}

#[test]
fn emit_noise_adds_columns() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "sys.json", SCALAR);
    let traj = dir.path().join("traj.csv");
    let out = sysid(&["simulate", "--system", &sys, "--T", "10", "--out", traj.to_str().unwrap(), "--emit-noise"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("t,x_0,xhat_0,u_0,w_0,eta_0\n"));
}

#[test]
fn bc_without_sigma_is_usage_error() {
    let out = sysid(&["estimate", "--method", "bc", "--traj", "t.csv", "--out", "e.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(sysid(&["check", "--system", "x.json", "--verbose"]).status.code(), Some(1));
}

#[test]
fn check_singular_a_exits_three() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "sys.json", &SCALAR.replace("[0.5]", "[0.0]"));
    let out = sysid(&["check", "--system", &sys]);
    assert_eq!(out.status.code(), Some(3));
    let report: AssumptionReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!report.a_invertible);
    assert!(!report.verdict.iv_ok);

    let ok = write(dir.path(), "ok.json", SCALAR);
    let out = sysid(&["check", "--system", &ok]);
    let report: AssumptionReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(if report.all_ok() { 0 } else { 3 }));
}

#[test]
fn bounds_reports_constants_and_notices() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "sys.json", SCALAR);
    let out = sysid(&["bounds", "--system", &sys, "--delta", "0.05", "--T", "100", "--eps-eta", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["psi", "psi_A", "rho_A", "phi_R", "phi_A", "phi_u", "kappa1", "kappa2", "T_threshold_iv", "T_threshold_bc", "delta", "c1", "c2"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["delta"], 0.05);
    assert!(v["notices"].as_array().is_some_and(|n| !n.is_empty()));
}

#[test]
fn runtime_errors_exit_two_with_error_name() {
    let dir = TempDir::new().unwrap();
    let auto = write(
        dir.path(),
        "auto.json",
        r#"{"A": {"kind": "identity", "dim": 1, "scale": 0.5}, "sigma_w": {"kind": "identity", "dim": 1}, "sigma_eta": {"kind": "identity", "dim": 1}}"#,
    );
    let out = sysid(&["bounds", "--system", &auto]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[not-applicable]"));
    assert!(out.stdout.is_empty());
}

#[test]
fn experiment_builtin_writes_four_files() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("results");
    let out = sysid(&["experiment", "--builtin", "paper-autonomous", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["records.csv", "summary.csv", "plot.svg", "config_echo.json"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let rows = fs::read_to_string(out_dir.join("records.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 3 * 3 * 20);
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("config_echo.json")).unwrap()).unwrap();
    assert_eq!(echo["trials"], 20);
}

#[test]
fn experiment_from_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        r#"{{"system": {SCALAR}, "estimators": ["LS", "BC"], "T_grid": [100, 400], "trials": 3,
            "master_seed": 9, "sigma_eta_hat": {{"perturb": 0.1}}, "description": "small"}}"#
    );
    let cfg = write(dir.path(), "exp.json", &cfg);
    let out_dir = dir.path().join("r");
    let out = sysid(&["experiment", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(out_dir.join("records.csv")).unwrap().lines().count(), 13);

    let bad = write(dir.path(), "bad.json", &fs::read_to_string(&cfg).unwrap().replace("[100, 400]", "[400, 100]"));
    let out = sysid(&["experiment", "--config", &bad, "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid-config"));
}
