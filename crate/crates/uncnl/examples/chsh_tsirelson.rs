//! CHSH values of concrete setups: the optimal qubit strategy at
//! Tsirelson's bound, isotropic noise scaling, and classical baselines.
//!
//! Run with `cargo run --example chsh_tsirelson`.

use uncnl::nonlocality::{chsh_from_probs, chsh_value, BipartiteSetup, TSIRELSON};

fn main() {
    let ideal = BipartiteSetup::optimal_qubit().expect("ideal setup");
    let beta = chsh_value(&ideal).expect("chsh value");
    println!("optimal qubit setup:    beta = {beta:.12}");
    println!("Tsirelson bound:        2*sqrt(2) = {TSIRELSON:.12}");

    println!("\nisotropic noise scaling (beta is linear in the visibility):");
    for v in [1.0, 0.9, 0.75, 0.5, 0.0] {
        let setup = BipartiteSetup::werner(v).expect("werner setup");
        let b = chsh_value(&setup).expect("chsh value");
        println!("  visibility {v:.2}: beta = {b:+.9}  (classical bound 2)");
    }

    // The algebraic maximum 4 needs all four agreement probabilities at 1,
    // which no physical strategy reaches; the best classical strategy wins
    // three of the four input pairs.
    let algebraic = chsh_from_probs(1.0, 1.0, 1.0, 1.0).unwrap();
    let classical = chsh_from_probs(1.0, 1.0, 1.0, 0.0).unwrap();
    let quantum = chsh_from_probs(
        (2.0 + 2f64.sqrt()) / 4.0,
        (2.0 + 2f64.sqrt()) / 4.0,
        (2.0 + 2f64.sqrt()) / 4.0,
        (2.0 + 2f64.sqrt()) / 4.0,
    )
    .unwrap();
    println!("\nscore algebra: algebraic max {algebraic}, classical max {classical}, quantum max {quantum:.9}");

    assert!((beta - TSIRELSON).abs() < 1e-12);
    assert!((quantum - TSIRELSON).abs() < 1e-12);
    assert!((classical - 2.0).abs() < 1e-15);
    let noisy = chsh_value(&BipartiteSetup::werner(0.9).unwrap()).unwrap();
    assert!((noisy - 0.9 * TSIRELSON).abs() < 1e-12);
    println!("\nall checks passed");
}
