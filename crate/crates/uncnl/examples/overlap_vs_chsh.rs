//! The exact trade-off between measurement incompatibility and
//! nonlocality: a setup's CHSH value never exceeds
//! 2(sqrt(c*) + sqrt(1 - c*)), and a high CHSH score pins the effective
//! overlap near 1/2.
//!
//! Run with `cargo run --example overlap_vs_chsh`.

use uncnl::nonlocality::{
    beta_bound_from_overlap, chsh_value, overlap_bound_from_beta, BipartiteSetup, TSIRELSON,
};
use uncnl::overlap::effective_overlap_ub;
use uncnl::quantum::{random_binary_projective, random_state};

fn main() {
    // The extremes: the optimal setup has minimal overlap and maximal
    // CHSH value.
    let ideal = BipartiteSetup::optimal_qubit().expect("setup");
    let beta = chsh_value(&ideal).expect("chsh");
    let rho_a = ideal.state.marginal(&[0]).expect("marginal");
    let report = effective_overlap_ub(&rho_a, &ideal.x, &ideal.y).expect("overlap");
    let c_hat = report.effective_overlap_ub();
    println!("optimal setup: beta = {beta:.9}, effective overlap <= {c_hat:.9}");
    println!(
        "  beta bound from overlap:   {:.9}",
        beta_bound_from_overlap(c_hat).unwrap()
    );
    println!(
        "  overlap bound from beta:   {:.9}",
        overlap_bound_from_beta(beta).unwrap()
    );

    // Random setups never violate either direction of the bound.
    println!("\n500 random setups (qubit and two-qubit sides):");
    let mut worst_slack = f64::INFINITY;
    for t in 0..500u64 {
        let d = if t % 2 == 0 { 2 } else { 4 };
        let state = random_state(d * d, d * d, 10_000 + t)
            .unwrap()
            .regroup(vec![d, d])
            .unwrap();
        let mk = |s: u64| {
            random_binary_projective(d, s)
                .unwrap()
                .to_binary_povm()
                .unwrap()
        };
        let setup = BipartiteSetup::new(
            state,
            mk(20_000 + t),
            mk(30_000 + t),
            mk(40_000 + t),
            mk(50_000 + t),
        )
        .unwrap();
        let beta = chsh_value(&setup).unwrap();
        let rho_a = setup.state.marginal(&[0]).unwrap();
        let c_hat = effective_overlap_ub(&rho_a, &setup.x, &setup.y)
            .unwrap()
            .effective_overlap_ub();
        let slack = beta_bound_from_overlap(c_hat).unwrap() - beta;
        worst_slack = worst_slack.min(slack);
        assert!(
            slack >= -1e-7,
            "instance {t}: beta {beta} vs overlap {c_hat}"
        );
        assert!(c_hat <= overlap_bound_from_beta(beta).unwrap() + 1e-7);
    }
    println!("  all satisfied; smallest slack of the beta bound: {worst_slack:.6}");

    assert!((beta - TSIRELSON).abs() < 1e-9);
    assert!((c_hat - 0.5).abs() < 1e-9 || c_hat >= 0.5);
    println!("\nall checks passed");
}
