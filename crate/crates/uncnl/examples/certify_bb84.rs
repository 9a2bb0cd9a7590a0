//! Certifying an entanglement-based BB84 source with an untrusted CHSH
//! test device: simulate i.i.d. rounds, tally the winning fraction, and
//! convert it into an overlap certificate with a one-sided confidence
//! bound.
//!
//! Run with `cargo run --example certify_bb84 --release`.

use uncnl::certify::{estimate, simulate_rounds_with_threads};
use uncnl::nonlocality::{BipartiteSetup, TSIRELSON};

const ROUNDS: u64 = 100_000;
const SEED: u64 = 0xB0B5;
const CI: f64 = 0.99;

fn main() {
    println!("ideal source, {ROUNDS} rounds, seed {SEED:#x}:");
    let setup = BipartiteSetup::optimal_qubit().expect("setup");
    let tally = simulate_rounds_with_threads(&setup, ROUNDS, SEED, 4).expect("simulation");
    let report = estimate(&tally, CI).expect("estimate");
    println!("  wins           {} / {}", report.successes, report.rounds);
    println!("  p_hat          {:.6}", report.p_hat);
    println!(
        "  beta_hat       {:.6}  (Tsirelson {TSIRELSON:.6})",
        report.beta_hat
    );
    println!("  c*_hat         {:.6}", report.cstar_hat);
    println!("  q_hat          {:.6} bits", report.q_hat_bits);
    println!(
        "  c* upper bound {:.6} at {CI} one-sided confidence",
        report.cstar_ci_upper
    );
    println!("  verdict: {}", report.verdict);

    let p_ideal = (2.0 + 2f64.sqrt()) / 4.0;
    let sigma = (p_ideal * (1.0 - p_ideal) / ROUNDS as f64).sqrt();
    assert!((report.p_hat - p_ideal).abs() < 5.0 * sigma);
    assert!(
        report.cstar_ci_upper >= 0.5,
        "bound must cover the true overlap 1/2"
    );

    println!("\nnoisy source (visibility 0.9):");
    let noisy = BipartiteSetup::werner(0.9).expect("setup");
    let tally = simulate_rounds_with_threads(&noisy, ROUNDS, SEED + 1, 4).expect("simulation");
    let report = estimate(&tally, CI).expect("estimate");
    println!(
        "  beta_hat       {:.6}  (expected {:.6})",
        report.beta_hat,
        0.9 * TSIRELSON
    );
    println!("  c*_hat         {:.6}", report.cstar_hat);
    println!("  c* upper bound {:.6}", report.cstar_ci_upper);
    let sigma_beta = 8.0 * ((report.p_hat * (1.0 - report.p_hat)) / ROUNDS as f64).sqrt();
    assert!((report.beta_hat - 0.9 * TSIRELSON).abs() < 5.0 * sigma_beta);

    // Below the classical threshold no certificate is possible.
    println!("\nclassical-level source (visibility 0.5):");
    let weak = BipartiteSetup::werner(0.5).expect("setup");
    let tally = simulate_rounds_with_threads(&weak, ROUNDS, SEED + 2, 4).expect("simulation");
    let report = estimate(&tally, CI).expect("estimate");
    println!(
        "  beta_hat {:.6}, c* bound {:.6}",
        report.beta_hat, report.cstar_ci_upper
    );
    println!("  verdict: {}", report.verdict);
    assert!(
        (report.cstar_ci_upper - 1.0).abs() < 1e-12,
        "no certificate expected"
    );

    println!("\nall checks passed");
}
