use std::process::{Command, Output};

use serde_json::Value;

fn sqkd3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqkd3")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `(Q, r)` pairs of a sweep CSV.
fn q_and_r(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('Q'))
        .map(|l| {
            let mut it = l.split(',').map(|f| f.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn sweep_writes_header_and_grid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = sqkd3(&["sweep", "--eigen", "clamped", "--q-max", "0.2", "--steps", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# sqkd3 sweep variant=phi1 model=dep"));
    assert!(comment.contains("eigen=clamped"));
    assert_eq!(lines.next().unwrap(), "Q,r,t1,t2,t3,t4,X,p_lower,lambda1,lambda2,S_BEC,S_EC_upper,H_B_given_A");
    let rows = q_and_r(&csv);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], (0.0, 1.0));
    assert!(csv.lines().nth(2).unwrap().starts_with("0.00000000,1.00000000,"));
    let qs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    assert_eq!(qs, [0.0, 0.05, 0.1, 0.15, 0.2]);
}

#[test]
fn sweep_sign_changes_at_published_points() {
    let o = sqkd3(&["sweep", "--q-min", "0.19", "--q-max", "0.2", "--steps", "2"]);
    let rows = q_and_r(&stdout(&o));
    assert!(rows[0].1 > 0.0 && rows[1].1 < 0.0, "{rows:?}");
    let o = sqkd3(&["sweep", "--variant", "phi2", "--model", "indep", "--q-min", "0.029", "--q-max", "0.031", "--steps", "2"]);
    let rows = q_and_r(&stdout(&o));
    assert!(rows[0].1 > 0.0 && rows[1].1 < 0.0, "{rows:?}");
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = ["sweep", "--model", "indep", "--steps", "40"];
    let one = Command::new(env!("CARGO_BIN_EXE_sqkd3")).args(args).env("SQKD3_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_sqkd3")).args(args).env("SQKD3_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn invalid_grid_is_a_usage_error() {
    for args in [
        &["sweep", "--steps", "1"][..],
        &["sweep", "--q-min", "0.2", "--q-max", "0.1"],
        &["sweep", "--q-max", "0.4"],
        &["sweep", "--variant", "phi3"],
    ] {
        assert_eq!(sqkd3(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = sqkd3(&["sweep", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("I/O error"));
}

#[test]
fn threshold_json_matches_published_values() {
    for (variant, model, want) in [("phi1", "dep", 0.191), ("phi1", "indep", 0.061), ("phi2", "dep", 0.042), ("phi2", "indep", 0.030)] {
        let o = sqkd3(&["threshold", "--variant", variant, "--model", model]);
        assert!(o.status.success());
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let q = v["threshold"].as_f64().unwrap();
        assert!((q - want).abs() <= 0.005, "{variant}/{model}: {q}");
        assert!(v["report_at_threshold"]["r"].as_f64().unwrap().abs() < 1e-4);
        assert_eq!(v["convention"]["basis_noise"], "as-stated");
    }
}

#[test]
fn threshold_reports_convention_flags() {
    let o = sqkd3(&["threshold", "--p-mode", "corrected", "--basis-convention", "per-pair", "--eigen", "clamped"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["convention"]["p_mode"], "corrected");
    assert_eq!(v["convention"]["eigen"], "clamped");
    let q = v["threshold"].as_f64().unwrap();
    assert!(q > 0.05 && q < 0.1, "{q}");
}

#[test]
fn simulate_without_noise_has_no_deviation() {
    let o = sqkd3(&["simulate", "-n", "100000", "--q", "0", "--seed", "3"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["max_deviation_sigma"].as_f64().unwrap(), 0.0);
    assert_eq!(v["raw_key_error_rate"].as_f64().unwrap(), 0.0);
    assert_eq!(v["empirical"].as_array().unwrap().len(), 27);
}

#[test]
fn simulate_is_deterministic_and_writes_counts() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let args = ["simulate", "-n", "50000", "--q", "0.1", "--seed", "11", "--counts-out", counts.to_str().unwrap()];
    let a = sqkd3(&args);
    let b = sqkd3(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = std::fs::read_to_string(&counts).unwrap();
    assert!(csv.starts_with("category,sent,bob,alice,count\n"));
    assert_eq!(csv.lines().count(), 1 + 27 + 9);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!(v["max_deviation_sigma"].as_f64().unwrap() < 5.0);
}

#[test]
fn verify_exit_code_tracks_group_results() {
    let o = sqkd3(&["verify"]);
    let out = stdout(&o);
    let groups: Vec<&str> = out.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(groups.len(), 7);
    let all_pass = groups.iter().all(|l| l.starts_with("[PASS]"));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
    for name in ["MUB", "unitarity sum rules", "Lemma 1", "appendix equivalence", "eigenvalue oracle", "channel dilation"] {
        assert!(out.contains(&format!("[PASS] {name}:")), "{name} should pass:\n{out}");
    }
}

#[test]
fn injected_basis_fault_fails_mub() {
    let o = sqkd3(&["verify", "--inject-fault", "t-basis"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] MUB:"));
}

#[test]
fn injected_table_fault_fails_equivalence() {
    let o = sqkd3(&["verify", "--inject-fault", "appendix"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("[FAIL] appendix equivalence:"));
    assert!(out.contains("[PASS] MUB:"));
}
