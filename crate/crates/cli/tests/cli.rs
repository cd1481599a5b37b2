use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spr_lab::{io, CoefVec, SprError};
use spr_lab_cli::commands::write_modulus;
use spr_lab_cli::error::{EXIT_CONFIG, EXIT_DEGENERATE, EXIT_FAILURE};
use spr_lab_cli::{CliError, ExperimentConfig};

fn spr_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spr-lab"))
        .args(args)
        .env_remove("SPR_LAB_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn run_config(dir: &Path, text: &str) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    spr_lab(&["run", "--config", path.to_str().unwrap()])
}

#[test]
fn basis_check_retrieve_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("sine.json");
    let m = manifest.to_str().unwrap();
    let o = spr_lab(&["basis", "--kind", "lacunary-sine", "--m", "3", "--base", "4", "--grid", "300", "--out", m]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout["results"]["len"], 3);

    let report = dir.path().join("check.json");
    let o = spr_lab(&["check", "--basis", m, "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let check = read_json(&report);
    assert_eq!(check["results"]["verdict"], "spr-hypotheses-satisfied");
    assert!((check["results"]["delta"].as_f64().unwrap() - 0.5).abs() < 1e-10);

    let basis = io::load_basis(&manifest).unwrap();
    let a = CoefVec::from_real(&[0.6, -0.48, 0.64]);
    let modulus = dir.path().join("modulus.csv");
    write_modulus(&basis, &a, &modulus).unwrap();
    let out = dir.path().join("retrieved.json");
    let o = spr_lab(&["retrieve", "--basis", m, "--modulus", modulus.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = read_json(&out);
    let got: Vec<f64> = r["results"]["coeffs"].as_array().unwrap().iter().map(|c| c[0].as_f64().unwrap()).collect();
    let sign = got[0].signum();
    for (g, e) in got.iter().zip([0.6, -0.48, 0.64]) {
        assert!((sign * g - e).abs() < 1e-8, "{got:?}");
    }
    assert_eq!(r["results"]["anchor"], 3);
}

#[test]
fn degenerate_basis_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rad.json");
    let o = spr_lab(&["basis", "--kind", "iid", "--m", "3", "--support", "1:0:1/2,-1:0:1/2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_DEGENERATE);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run_config(d, "{not json")), EXIT_CONFIG);
    assert_eq!(code(&run_config(d, r#"{"command": "sidon", "h": 2, "out": "x.json", "colour": 1}"#)), EXIT_CONFIG);
    assert_eq!(code(&run_config(d, r#"{"command": "teleport"}"#)), EXIT_CONFIG);
    let no_seed = r#"{"command": "reproduce-example", "target": "example3"}"#;
    assert_eq!(code(&run_config(d, no_seed)), EXIT_CONFIG);
    let o = spr_lab(&["check", "--basis", d.join("missing.json").to_str().unwrap(), "--report", "r.json"]);
    assert_eq!(code(&o), EXIT_CONFIG);
}

#[test]
fn strict_parsing_in_library() {
    assert!(ExperimentConfig::from_json(r#"{"command": "sidon", "h": 3, "out": "s.json"}"#).is_ok());
    assert!(ExperimentConfig::from_json(r#"{"command": "sidon", "h": 3}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"command": "identity", "basis": "b.json", "out": "o.json"}"#).is_err());
    assert_eq!(CliError::from(SprError::InsufficientSpread("x".into())).code, EXIT_FAILURE);
}

#[test]
fn sidon_report_lists_terms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b3.json");
    let o = spr_lab(&["sidon", "--h", "3", "--count", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = read_json(&out);
    assert_eq!(r["terms"], serde_json::json!([1, 2, 5, 14]));
    assert_eq!(r["results"]["verification"]["holds"], true);
}

#[test]
fn counterexamples_reproduce_with_expected_verdicts() {
    for target in ["counterexample-base3", "counterexample-rademacher", "counterexample-complex-conjugate"] {
        let o = spr_lab(&["reproduce-example", target]);
        assert_eq!(code(&o), 0, "{target}: {}", String::from_utf8_lossy(&o.stderr));
        let r: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(r["paper_example"], target);
        assert_eq!(r["results"]["verdict_matches"], true);
    }
}

#[test]
fn stability_on_admissible_basis_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("b.json");
    let m = manifest.to_str().unwrap();
    assert_eq!(code(&spr_lab(&["basis", "--kind", "lacunary-sine", "--m", "3", "--base", "4", "--grid", "300", "--out", m])), 0);
    let out = dir.path().join("s.json");
    let o = spr_lab(&["stability", "--basis", m, "--trials", "200", "--adversarial", "2x20", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["results"]["report"]["violation_count"], 0);
    assert!(r["results"]["report"]["sup_ratio"].as_f64().unwrap() >= r["results"]["monte_carlo_sup"].as_f64().unwrap());
}

#[test]
fn identity_sweep_reports_small_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("e.json");
    let m = manifest.to_str().unwrap();
    assert_eq!(code(&spr_lab(&["basis", "--kind", "exponential", "--seq", "1,2,5,11", "--grid", "64", "--out", m])), 0);
    let out = dir.path().join("i.json");
    let o = spr_lab(&["identity", "--basis", m, "--pairs", "50", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = read_json(&out);
    for key in ["max_expansion_residual", "max_algebraic_residual", "max_fourier_residual"] {
        assert!(r["results"][key].as_f64().unwrap() < 1e-9, "{key}");
    }
}
