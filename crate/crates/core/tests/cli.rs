//! End-to-end tests of the `geodd` binary: exit codes, JSON report shape,
//! and determinism across runs.

use std::process::{Command, Output};

use tempfile::tempdir;

fn geodd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geodd"))
        .args(args)
        .output()
        .expect("failed to launch geodd")
}

/// Parse the leading JSON object on stdout; the attack command prints a
/// trailing status line after the report.
fn stdout_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::Deserializer::from_str(&text)
        .into_iter::<serde_json::Value>()
        .next()
        .expect("empty stdout")
        .expect("stdout did not start with JSON")
}

#[test]
fn collect_then_subspaces_roundtrip() {
    let dir = tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let out = geodd(&[
        "collect",
        "--system",
        "consensus",
        "--seed",
        "7",
        "--out",
        data_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "collect failed: {out:?}");
    let report = stdout_json(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["n"], 11);
    assert_eq!(report["persistently_exciting"], true);
    assert!(data_dir.join("manifest.json").exists());
    assert!(data_dir.join("X.csv").exists());

    let out = geodd(&["subspaces", "--data", data_dir.to_str().unwrap(), "--oracle"]);
    assert!(out.status.success(), "subspaces failed: {out:?}");
    let report = stdout_json(&out);
    assert_eq!(report["vstar"]["dim"], 8);
    assert_eq!(report["sstar"]["dim"], 6);
    assert_eq!(report["rstar"]["dim"], 3);
    for key in ["vstar", "sstar", "rstar"] {
        let angle = report["oracle_angles"][key].as_f64().unwrap();
        assert!(angle <= 1e-8, "{key} oracle angle {angle}");
    }
}

#[test]
fn zeros_match_oracle_on_fixture() {
    let out = geodd(&["zeros", "--system", "siso-zero-2", "--oracle"]);
    assert!(out.status.success(), "zeros failed: {out:?}");
    let report = stdout_json(&out);
    let zeros = report["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 2);
    for entry in zeros {
        assert_eq!(entry["membership"], true);
    }
    let mut res: Vec<f64> = zeros
        .iter()
        .map(|e| e["zero"]["re"].as_f64().unwrap())
        .collect();
    res.sort_by(f64::total_cmp);
    assert!((res[0] + 0.25).abs() < 1e-6 && (res[1] - 0.5).abs() < 1e-6);
}

#[test]
fn feedback_reports_small_residual() {
    let out = geodd(&["feedback", "--system", "consensus"]);
    assert!(out.status.success(), "feedback failed: {out:?}");
    let report = stdout_json(&out);
    assert!(report["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["gain"]["rows"], 3);
    assert_eq!(report["gain"]["cols"], 11);
}

#[test]
fn attack_is_stealthy_and_writes_trace() {
    let dir = tempdir().unwrap();
    let out = geodd(&[
        "attack",
        "--system",
        "consensus",
        "--attack-energy",
        "10",
        "--onset",
        "24",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "attack failed: {out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.trim_end().ends_with("stealthy: true"));
    let report = stdout_json(&out);
    assert!(report["max_state_deviation"].as_f64().unwrap() > 0.01);
    assert!(report["max_output_deviation"].as_f64().unwrap() <= 1e-9);
    assert!(dir.path().join("attack.csv").exists());
}

#[test]
fn verify_suite_passes() {
    let out = geodd(&["verify", "--trials", "25", "--seed", "0"]);
    assert!(out.status.success(), "verify failed: {out:?}");
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["trials"], 25);
}

#[test]
fn runs_are_deterministic_for_a_fixed_seed() {
    let run = || geodd(&["zeros", "--system", "random:4,2,2,11", "--seed", "3"]);
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_data_directory_is_a_validation_error() {
    let out = geodd(&["subspaces", "--data", "/nonexistent/geodd-data"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_system_is_a_validation_error() {
    let out = geodd(&["zeros", "--system", "no-such-system"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn corrupt_data_directory_is_rejected() {
    let dir = tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let out = geodd(&[
        "collect",
        "--system",
        "siso-zero-1",
        "--out",
        data_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // Truncate one matrix so the shapes in the manifest no longer hold.
    std::fs::write(data_dir.join("X.csv"), "0.0,0.0\n").unwrap();
    let out = geodd(&["subspaces", "--data", data_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn degenerate_system_yields_numerical_exit_code() {
    // A system with R* ≠ 0 cannot produce a zero-enumeration certificate.
    let out = geodd(&["zeros", "--system", "consensus"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degenerate"), "stderr: {err}");
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempdir().unwrap();
    let data_dir = dir.path().join("env-data");
    let out = Command::new(env!("CARGO_BIN_EXE_geodd"))
        .args(["collect", "--system", "siso-zero-1"])
        .env("GEODD_OUT", &data_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(data_dir.join("manifest.json").exists());
}
