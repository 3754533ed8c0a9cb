use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mems-extremal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mems-extremal-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn constants_reports_known_values() {
    let out = run(&["constants", "--n", "13", "--p", "2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["H_n"], 855.5625);
    let v = json(&run(&["constants", "--n", "4", "--p", "2"]));
    assert!(v["p_c_plus"].is_null());
    let v = json(&run(&["constants", "--n", "3", "--p", "2"]));
    assert!((v["K0"].as_f64().unwrap() - 56.0 / 81.0).abs() < 1e-15);
    // manifest goes to stderr when no output directory is given
    let manifest: Value = serde_json::from_slice(&run(&["constants", "--n", "3", "--p", "2"]).stderr).unwrap();
    assert_eq!(manifest["command"], "constants");
}

#[test]
fn invalid_arguments_exit_2() {
    assert_eq!(run(&["branch", "--n", "3", "--p", "2", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--n", "3", "--p", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["certify", "--n", "13", "--p", "250", "--lambda-prime", "pi", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let out = run(&["--mesh", "64", "mu1", "--n", "3", "--p", "2", "--lambda", "1e4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mu1_at_zero_is_positive() {
    let out = run(&["mu1", "--n", "3", "--p", "2", "--lambda", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["mu1"].as_f64().unwrap() > 0.0);
    assert_eq!(v["mesh_cells"], 256);
}

#[test]
fn hardy_sweep() {
    let v = json(&run(&["hardy", "--n", "13"]));
    assert_eq!(v["gap_nonnegative"], true);
    let v = json(&run(&["hardy", "--n", "13", "--scale", "1.05"]));
    assert_eq!(v["gap_decreasing"], true);
    assert_eq!(v["sweep"].as_array().unwrap().len(), 3);
}

#[test]
fn certify_accepts_symbols_and_keeps_exit_0() {
    let out = run(&["certify", "--n", "32", "--m", "2", "--p", "1000", "--lambda-prime", "e2", "--beta", "e2+0.01"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["lambda_prime"].as_f64().unwrap(), 2f64.exp());
    assert!((v["beta"].as_f64().unwrap() - 2f64.exp() - 0.01).abs() < 1e-15);
    assert!(v["stability_margin"].as_f64().unwrap() > 0.0);

    let out = run(&["certify", "--n", "13", "--m", "3.5", "--p", "2", "--lambda-prime", "2.03", "--beta", "2.15"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "inconclusive");

    let v = json(&run(&["certify", "--n", "40", "--m", "2", "--p", "5000", "--lambda-prime", "Hn/p", "--beta", "Hn/p"]));
    assert_eq!(v["equality_case"], true);
}

#[test]
fn table1_has_nineteen_rows() {
    let out = run(&["--format", "csv", "table1", "--p", "250"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 20);
    assert_eq!(
        lines[0],
        "n,m,p,lambda_prime_K0,beta_K0,sup_h,x_star,subsolution_margin,stability_margin,verdict"
    );
    assert!(lines[1].starts_with("13,3.5,250,"));
}

#[test]
fn branch_outputs_are_deterministic() {
    let args = |dir: &PathBuf| {
        let mut v: Vec<String> = ["--mesh", "64", "--jobs", "2", "--out-dir"].iter().map(|s| s.to_string()).collect();
        v.push(dir.display().to_string());
        v.extend(["branch", "--n", "3", "--p", "2", "--steps", "30", "--a-max", "0.7"].iter().map(|s| s.to_string()));
        v
    };
    let (a, b) = (scratch("a"), scratch("b"));
    assert!(bin().args(args(&a)).status().unwrap().success());
    assert!(bin().args(args(&b)).status().unwrap().success());
    for f in ["branch.csv", "branch.json", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("branch.csv")).unwrap();
    assert!(csv.starts_with("a,lambda,lambda_over_K0,u_max,mu1,e_bilap,e_pot,fold_flag\n"));
    assert!(!csv.contains('\r'));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["lambda_star_above_K0"], "pass");
    assert!(summary["fold"].is_object());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["mesh_cells"], 64);
    let _ = std::fs::remove_dir_all(a);
    let _ = std::fs::remove_dir_all(b);
}
