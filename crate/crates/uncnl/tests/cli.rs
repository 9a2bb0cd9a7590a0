//! End-to-end checks of the `uncnl` binary: exit codes, output formats,
//! reproducibility, and the documented subcommand surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uncnl::io;
use uncnl::nonlocality::{BipartiteSetup, GramMatrix, TSIRELSON};
use uncnl::sdp::RealMatrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uncnl"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bound_converts_beta_to_overlap_and_bits() {
    let out = bin()
        .args(["bound", "--beta", "2.8284271247461903"])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!((v["cstar_bound"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["q_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = bin().args(["bound", "--cstar", "0.5"]).output().unwrap();
    let v = stdout_json(&out);
    assert!((v["beta_bound"].as_f64().unwrap() - TSIRELSON).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    let out = bin().args(["bound"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_json() {
    let out = bin()
        .args(["overlap", "--setup", "/nonexistent/setup.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr JSON");
    assert!(err["error"].is_string());
    assert!(err["kind"].is_string());

    // Unphysical CHSH value is a domain error, not a usage error.
    let out = bin().args(["bound", "--beta", "3.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "parameter");
}

#[test]
fn overlap_of_mub_setup_file() {
    let path = tmp("mub_setup.json");
    let setup = BipartiteSetup::optimal_qubit().unwrap();
    io::write_bipartite_setup(&path, &setup).unwrap();
    // Replace the state with Alice's marginal: overlap works on the
    // A-side setup alone.
    let marginal = setup.state.marginal(&[0]).unwrap();
    let json = io::SetupJson {
        state: io::MatrixJson::from_matrix(marginal.mat()),
        dims: vec![2],
        x: Some(io::PovmJson::from_povm(&setup.x)),
        y: Some(io::PovmJson::from_povm(&setup.y)),
        r: None,
        s: None,
    };
    io::write_text(&path, &io::to_json(&json).unwrap()).unwrap();

    let out = bin()
        .args(["overlap", "--setup", path.to_str().unwrap()])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!((v["effective_overlap_ub"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((v["mu_overlap"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["method"], "projective-direct");
}

#[test]
fn overlap_of_noisy_povm_setup_uses_dilation() {
    let path = tmp("noisy_setup.json");
    let x = uncnl::quantum::random_binary_povm(2, 51).unwrap();
    let y = uncnl::quantum::random_binary_povm(2, 52).unwrap();
    let state = uncnl::quantum::random_state(2, 2, 53).unwrap();
    let json = io::SetupJson {
        state: io::MatrixJson::from_matrix(state.mat()),
        dims: vec![2],
        x: Some(io::PovmJson::from_povm(&x)),
        y: Some(io::PovmJson::from_povm(&y)),
        r: None,
        s: None,
    };
    io::write_text(&path, &io::to_json(&json).unwrap()).unwrap();
    let out = bin()
        .args(["overlap", "--setup", path.to_str().unwrap()])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["method"], "dilated");
    let ub = v["effective_overlap_ub"].as_f64().unwrap();
    assert!(ub > 0.0 && ub <= 1.0 + 1e-9);
    assert!((v["gamma"].as_f64().unwrap() - ub).abs() < 1e-9);
}

#[test]
fn chsh_of_written_setup() {
    let path = tmp("ideal_setup.json");
    io::write_bipartite_setup(&path, &BipartiteSetup::optimal_qubit().unwrap()).unwrap();
    let out = bin()
        .args(["chsh", "--setup", path.to_str().unwrap()])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!((v["chsh_value"].as_f64().unwrap() - TSIRELSON).abs() < 1e-12);
}

#[test]
fn realize_then_chsh_round_trip() {
    // The optimal constrained-correlation matrix realizes a setup whose
    // CHSH value is Tsirelson's bound.
    let gamma: f64 = 0.5;
    let (rg, rr) = (gamma.sqrt(), (1.0 - gamma).sqrt());
    let entries = RealMatrix::from_rows(&[
        &[1.0, 0.0, rg, rr],
        &[0.0, 1.0, rg, -rr],
        &[rg, rg, 1.0, 0.0],
        &[rr, -rr, 0.0, 1.0],
    ])
    .unwrap();
    let gram_path = tmp("gstar.json");
    io::write_gram(&gram_path, &GramMatrix::new(entries, 2, 2).unwrap()).unwrap();

    let setup_path = tmp("realized.json");
    let out = bin()
        .args([
            "realize",
            "--gram",
            gram_path.to_str().unwrap(),
            "--out",
            setup_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = bin()
        .args(["chsh", "--setup", setup_path.to_str().unwrap()])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!((v["chsh_value"].as_f64().unwrap() - TSIRELSON).abs() < 1e-8);
}

#[test]
fn betamax_reports_solution_and_certificate() {
    let out = bin().args(["betamax", "--gamma", "0.8"]).output().unwrap();
    let v = stdout_json(&out);
    let expect = 2.0 * (0.8_f64.sqrt() + 0.2_f64.sqrt());
    assert!((v["sdp_value"].as_f64().unwrap() - expect).abs() < 1e-6);
    assert!((v["analytic"].as_f64().unwrap() - expect).abs() < 1e-15);
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["certificate"]["all_pass"], true);
}

#[test]
fn entropy_of_state_file() {
    let path = tmp("bell.json");
    let bell = uncnl::quantum::bb84_source_state(1.0).unwrap();
    let json = io::SetupJson {
        state: io::MatrixJson::from_matrix(bell.mat()),
        dims: vec![2, 2],
        x: None,
        y: None,
        r: None,
        s: None,
    };
    io::write_text(&path, &io::to_json(&json).unwrap()).unwrap();
    let out = bin()
        .args(["entropy", "--setup", path.to_str().unwrap()])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert!(v["von_neumann"].as_f64().unwrap().abs() < 1e-9);
    assert!((v["cond_von_neumann"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((v["min_entropy"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    assert!((v["max_entropy"].as_f64().unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn curve_csv_endpoints() {
    let path = tmp("fig1.csv");
    let out = bin()
        .args(["curve", "--samples", "101", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "beta,cstar_bound,q_bits");
    let parse = |line: &str| -> Vec<f64> { line.split(',').map(|t| t.parse().unwrap()).collect() };
    let first = parse(lines.next().unwrap());
    assert_eq!(first, vec![2.0, 1.0, 0.0]);
    let last = parse(text.lines().last().unwrap());
    assert!((last[0] - TSIRELSON).abs() < 1e-15);
    assert_eq!(&last[1..], &[0.5, 1.0]);
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn certify_runs_are_byte_identical_and_thread_independent() {
    let args = [
        "certify", "--rounds", "20000", "--seed", "991", "--ci", "0.99",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let c = bin().args(args).args(["--threads", "4"]).output().unwrap();
    assert_eq!(a.stdout, c.stdout);

    let v = stdout_json(&a);
    assert_eq!(v["N"].as_u64().unwrap(), 20000);
    assert!(v["p_hat"].as_f64().unwrap() > 0.8);
    assert!(v["cstar_ci_upper"].as_f64().unwrap() >= 0.5);
}

#[test]
fn verify_suite_exits_clean_and_honors_tolerance_env() {
    let out = bin()
        .args(["verify", "--suite", "sdp", "--trials", "11", "--seed", "5"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("suite sdp:"));
    assert!(text.contains("PASS"));

    // An absurdly tight tolerance makes the Monte Carlo suites fail,
    // demonstrating the UNCNL_TOL override and the nonzero exit.
    let out = bin()
        .args([
            "verify", "--suite", "theorem1", "--trials", "5", "--seed", "5",
        ])
        .env("UNCNL_TOL", "-1.0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args(["verify", "--suite", "nonsense", "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_all_with_threads() {
    let out = bin()
        .args([
            "verify",
            "--suite",
            "all",
            "--trials",
            "4",
            "--seed",
            "3",
            "--threads",
            "6",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    for name in uncnl::suites::SUITE_NAMES {
        assert!(text.contains(&format!("suite {name}:")), "missing {name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(text.lines().last().unwrap()).expect("summary JSON");
    assert_eq!(summary["all_pass"], true);
}

#[test]
fn full_precision_floats_in_outputs() {
    let out = bin().args(["bound", "--beta", "2.5"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    // 17 significant digits, exponent notation.
    assert!(text.contains("9.1339864235384227e-1"), "{text}");
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    let reparsed = v["cstar_bound"].as_f64().unwrap();
    assert_eq!(reparsed, 0.5 + 2.5 / 8.0 * (8.0 - 6.25_f64).sqrt());
}
