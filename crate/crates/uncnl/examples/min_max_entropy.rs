//! One-shot entropies by semidefinite programming: conditional
//! min-entropy as a guessing-probability SDP, max-entropy through
//! purification duality, and the ordering around the von Neumann
//! entropy.
//!
//! Run with `cargo run --example min_max_entropy`.

use uncnl::entropy::{cond_von_neumann, max_entropy, min_entropy, min_entropy_detailed};
use uncnl::quantum::{bb84_source_state, random_state};

fn main() {
    // Landmarks.
    let bell = bb84_source_state(1.0).expect("bell state");
    let info = min_entropy_detailed(&bell).expect("min-entropy sdp");
    println!("maximally entangled pair:");
    println!(
        "  H_min(A|B) = {:+.9}  (SDP gap {:.1e})",
        info.hmin_bits, info.sdp_gap
    );
    println!("  H(A|B)     = {:+.9}", cond_von_neumann(&bell).unwrap());
    println!("  H_max(A|B) = {:+.9}", max_entropy(&bell).unwrap());
    assert!((info.hmin_bits + 1.0).abs() < 1e-7);

    // Random bipartite states: H_min <= H <= H_max, with equality only
    // in degenerate cases.
    println!("\nrandom two-qubit states (rank 2):");
    println!("seed   H_min        H(A|B)      H_max");
    for seed in 0..8u64 {
        let rho = random_state(4, 2, 90_000 + seed)
            .unwrap()
            .regroup(vec![2, 2])
            .unwrap();
        let hmin = min_entropy(&rho).unwrap();
        let hvn = cond_von_neumann(&rho).unwrap();
        let hmax = max_entropy(&rho).unwrap();
        println!("{seed}      {hmin:+.6}    {hvn:+.6}   {hmax:+.6}");
        assert!(hmin <= hvn + 1e-7 && hvn <= hmax + 1e-7);
    }

    // Noise sweep on the entangled source: entropies rise together as
    // the state decoheres.
    println!("\nisotropic noise sweep:");
    println!("visibility   H_min(A|B)");
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=5 {
        let v = 1.0 - 0.2 * k as f64;
        let rho = bb84_source_state(v).unwrap();
        let hmin = min_entropy(&rho).unwrap();
        println!("{v:.1}          {hmin:+.6}");
        assert!(hmin >= prev - 1e-9, "min-entropy should grow with noise");
        prev = hmin;
    }
    println!("\nall checks passed");
}
