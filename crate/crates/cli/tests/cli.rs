use std::process::{Command, Output};

use serde_json::Value;

fn slelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slelab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = slelab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

/// Header and rows of CSV output, skipping the `#` config lines.
fn csv_of(args: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let out = slelab(args);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn params_at_percolation() {
    let v = json_of(&["params", "--kappa", "6"]);
    assert_eq!(v["result"]["central_charge"].as_f64(), Some(0.0));
    assert_eq!(v["result"]["theta_1"].as_f64(), Some(0.0));
    assert_eq!(v["config"]["command"]["params"]["kappa"].as_f64(), Some(6.0));
    // the dense phase of κ = 6 is Q = 1 percolation
    assert!((v["result"]["potts_q_dense"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn params_accepts_fractions() {
    let v = json_of(&["params", "--kappa", "8/3"]);
    assert_eq!(v["result"]["kappa"].as_f64(), Some(8.0 / 3.0));
    assert!(v["result"]["central_charge"].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn diagrams_are_catalan() {
    let v = json_of(&["diagrams", "--n", "3"]);
    assert_eq!(v["result"]["count"], 5);
    let list = v["result"]["diagrams"].as_array().unwrap();
    assert_eq!(list.len(), 5);
    assert_eq!(list[0]["pairs"], serde_json::json!([[1, 2], [3, 4], [5, 6]]));
    assert!(list.iter().all(|d| d["allowable_sequences"].as_u64().unwrap() > 0));
}

#[test]
fn eval_values() {
    let v = json_of(&["eval", "--solution", "counterexample", "--kappa", "4", "--point", "0,1,2,4"]);
    assert!((v["result"]["value"].as_f64().unwrap() - 48f64.sqrt()).abs() < 1e-12);
    let v = json_of(&["eval", "--solution", "s1", "--kappa", "6", "--coeffs", "2.5", "--point", "-3,-1"]);
    assert_eq!(v["result"]["value"].as_f64(), Some(2.5));
}

#[test]
fn cardy_at_the_square() {
    let v = json_of(&["cardy", "--ratio", "1"]);
    assert!((v["result"][0]["probability"].as_f64().unwrap() - 0.5).abs() < 1e-14);
    let (header, rows) = csv_of(&["--output", "csv", "cardy", "--ratio", "0.5,1,2"]);
    assert_eq!(header, ["R", "m", "probability"]);
    let p: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((p[0] + p[2] - 1.0).abs() < 1e-12);
}

#[test]
fn floats_round_trip_with_seventeen_digits() {
    let out = slelab(&["cardy", "--ratio", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"probability\"")).unwrap();
    let digits = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let value: f64 = digits.parse().unwrap();
    let expected = slelab::percolation::cardy_probability(2.0).unwrap();
    assert_eq!(value, expected);
}

#[test]
fn check_pde_passes_and_fails() {
    let v = json_of(&["check-pde", "--solution", "s2", "--kappa", "3", "--coeffs", "1,-0.5", "--samples", "4"]);
    assert_eq!(v["pass"], true);
    assert!(v["result"]["max_residual"].as_f64().unwrap() <= 1e-5);
    // the counterexample fails the Ward identities: exit status 1
    let out = slelab(&["check-pde", "--solution", "counterexample", "--kappa", "3", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["result"]["report"]["ward"][1].as_f64().unwrap() >= 0.1);
}

#[test]
fn check_pde_reads_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.json");
    std::fs::write(&path, "[[0, 1, 2, 4], [0.5, 1.25, 3, 3.75]]").unwrap();
    let v = json_of(&[
        "check-pde", "--solution", "g1", "--kappa", "6", "--points", path.to_str().unwrap(),
    ]);
    assert_eq!(v["result"]["report"]["n_points"], 2);
    std::fs::write(&path, "[[0, 2, 1, 4]]").unwrap();
    let out = slelab(&["check-pde", "--solution", "g1", "--kappa", "6", "--points", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn collapse_and_dual_vector() {
    let v = json_of(&["collapse", "--solution", "s1", "--kappa", "4", "--coeffs", "3", "--interval", "1"]);
    assert_eq!(v["result"]["value"].as_f64(), Some(3.0));
    let v = json_of(&[
        "collapse", "--solution", "g1", "--kappa", "6", "--interval", "1", "--point", "0,1,3,4",
    ]);
    // G₁ at κ = 6 vanishes as δ^{1/3} on (x₁, x₂)
    assert!(v["result"]["value"].as_f64().unwrap().abs() < 1e-6);
    assert!((v["result"]["exponent_fit"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.02);

    let v = json_of(&["dual-vector", "--solution", "constant", "--kappa", "6", "--n", "2"]);
    let entries = v["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        assert!((e["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn percolation_is_deterministic() {
    let args = ["percolate", "--width", "20", "--height", "20", "--trials", "2000", "--seed", "42", "--compare"];
    let a = slelab(&args);
    let b = slelab(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["result"]["batch"]["n_trials"], 2000);
    assert_eq!(a.status.code(), Some(if v["pass"] == true { 0 } else { 1 }));
    // the seed flag may also precede the subcommand
    let c = slelab(&["--seed", "42", "percolate", "--width", "20", "--height", "20", "--trials", "2000", "--compare"]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let v = json_of(&["--threads", threads, "percolate", "--width", "24", "--height", "24", "--trials", "3000"]);
        v["result"].clone()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn percolation_sweep_as_csv() {
    let (header, rows) = csv_of(&[
        "--output", "csv", "percolate", "--height", "16", "--ratios", "0.5,1,2", "--trials", "1000",
    ]);
    assert_eq!(header, ["R", "p_hat", "stderr", "cardy", "z"]);
    assert_eq!(rows.len(), 3);
    let r: Vec<f64> = rows.iter().map(|row| row[0].parse().unwrap()).collect();
    assert_eq!(r, [0.5, 1.0, 2.0]);
}

#[test]
fn csv_echoes_the_config() {
    let out = slelab(&["--output", "csv", "params", "--kappa", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "# command.params.kappa = 4"), "{text}");
    assert!(text.lines().any(|l| l == "# output = csv"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["params"][..],
        &["params", "--kappa", "6", "--bogus"],
        &["frobnicate"],
        &["percolate", "--width", "10", "--height", "10", "--ratios", "1"],
    ] {
        let out = slelab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn numerical_errors_exit_with_two() {
    for args in [
        &["params", "--kappa", "9"][..],
        &["cardy", "--ratio", "-1"],
        &["eval", "--solution", "s2", "--kappa", "4", "--point", "0,1,2"],
        &["eval", "--solution", "s1", "--kappa", "4", "--point", "1,0"],
        &["percolate", "--width", "7", "--height", "100"],
        &["--threads", "0", "params", "--kappa", "4"],
    ] {
        let out = slelab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}

#[test]
fn defaults_are_echoed_resolved() {
    let v = json_of(&["check-pde", "--solution", "s1", "--kappa", "3", "--samples", "2"]);
    assert_eq!(v["config"]["resolved"]["n"], 1);
    assert_eq!(v["config"]["resolved"]["points"], "sampled");
    let v = json_of(&["dual-vector", "--solution", "zero", "--kappa", "3"]);
    let anchor: Vec<f64> = serde_json::from_value(v["config"]["resolved"]["anchor"].clone()).unwrap();
    assert_eq!(anchor, [0.0, 1.0, 2.0, 3.0]);
}
