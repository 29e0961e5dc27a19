use hurwitz_rh::cli::{spectrum_report, EXIT_DIVISOR, EXIT_OK, EXIT_TOLERANCE, EXIT_VALIDATION};
use hurwitz_rh::covering::Covering;
use hurwitz_rh::kernels::{rotation_data, KernelEvaluator, Surface};
use hurwitz_rh::C64;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hurwitz-rh-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, config: &str, args: &[&str]) -> (i32, Value) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hurwitz-rh"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

const G0: &str = r#"{"kind":"hyperelliptic","branch_points":[[2,0],[-2,0]]}"#;
const G1: &str = r#"{"kind":"hyperelliptic","branch_points":[[3,0],[1,0],[-1,0],[-3,0]],"q":[[[0.3,0.2]]]}"#;

#[test]
fn spectrum_of_two_fold_coverings() {
    let dir = scratch("spectrum");
    let (code, rep) = run(&dir, G0, &["spectrum"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rep["predicted"], serde_json::json!(["1/2", "-1/2"]));
    let (code, rep) = run(&dir, G1, &["spectrum"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rep["spectrum"].as_array().unwrap().len(), 4);
}

#[test]
fn corrupted_v_fails_spectrum() {
    let cov = Covering::hyperelliptic(&[C64::new(2.0, 0.0), C64::new(-2.0, 0.0)], 0.0).unwrap();
    let mut rot = rotation_data(&KernelEvaluator::w(Surface::new(&cov).unwrap())).unwrap();
    rot.v[(0, 0)] += C64::new(1e-3, 0.0);
    let out = spectrum_report(&rot, &cov, false, 1e-10);
    assert_eq!(out.code, EXIT_TOLERANCE);
    assert_eq!(out.report["match"], false);
}

#[test]
fn stokes_golden_and_diagram_cases() {
    let dir = scratch("stokes");
    let (code, rep) = run(&dir, G0, &["stokes"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rep["S"], serde_json::json!([[1, 0], [-2, 1]]));
    let diagram = r#"{"kind":"diagram","cuts":[[1,2],[3,4],[1,2],[1,3],[0,1]]}"#;
    let (code, rep) = run(&dir, diagram, &["stokes"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rep["S"].as_array().unwrap().len(), 10);
    assert!(rep["S_blocks"].as_array().is_some());
    // λ = x³ − 3x is ramified over ∞
    let ramified = r#"{"kind":"rational","numerator":[[0,0],[-3,0],[0,0],[1,0]],"denominator":[[1,0]]}"#;
    let (code, _) = run(&dir, ramified, &["stokes"]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn full_verification_genus_one() {
    let dir = scratch("verify");
    let (code, rep) = run(&dir, G1, &["verify", "all"]);
    assert_eq!(code, EXIT_OK, "{rep:#}");
    assert_eq!(rep["pass"], true);
    // an impossible tolerance turns into a tolerance failure
    let (code, _) = run(&dir, G1, &["verify", "ode", "--tol-scale", "1e-12"]);
    assert_eq!(code, EXIT_TOLERANCE);
}

#[test]
fn divisor_and_validation_exit_codes() {
    let dir = scratch("codes");
    let cov = Covering::hyperelliptic(
        &[C64::new(3.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(-3.0, 0.0)],
        0.0,
    )
    .unwrap();
    let b = Surface::new(&cov).unwrap().periods.unwrap().riemann[(0, 0)];
    let cfg = format!(
        r#"{{"kind":"hyperelliptic","branch_points":[[3,0],[1,0],[-1,0],[-3,0]],"q":[[[{},{}]]]}}"#,
        -b.re, -b.im
    );
    let (code, _) = run(&dir, &cfg, &["verify", "transform"]);
    assert_eq!(code, EXIT_DIVISOR);
    let zero = r#"{"kind":"hyperelliptic","branch_points":[[2,0],[-2,0]],"z":[[0,0]]}"#;
    assert_eq!(run(&dir, zero, &["solve"]).0, EXIT_VALIDATION);
    assert_eq!(run(&dir, r#"{"kind":"nonsense"}"#, &["solve"]).0, EXIT_VALIDATION);
}

#[test]
fn output_is_deterministic() {
    let dir = scratch("det");
    let a = run(&dir, G1, &["solve", "--threads", "2"]).1;
    let b = run(&dir, G1, &["solve"]).1;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a["frames"].as_array().unwrap().len(), 6);
}

#[test]
fn contour_export_writes_csv() {
    let dir = scratch("csv");
    let out = dir.join("out");
    let (code, rep) = run(&dir, G0, &["export-contours", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rep["files"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(out.join("C1_r.csv")).unwrap();
    assert!(csv.starts_with("t,re_lambda,im_lambda,sheet\n"));
    assert_eq!(csv.lines().count(), 202);
    assert!(out.join("contours.json").exists());
}
