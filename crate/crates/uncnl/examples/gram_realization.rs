//! Correlations as geometry: every bipartite setup of binary
//! observables induces a PSD Gram matrix with unit diagonal, and every
//! such matrix is realized by anticommuting-generator observables on a
//! maximally entangled state. This example runs the loop both ways.
//!
//! Run with `cargo run --example gram_realization`.

use rand::Rng;
use rand::SeedableRng;
use uncnl::nonlocality::{
    chsh_weight, clifford_generators, gram_from_setup, realize_from_gram, BipartiteSetup,
    GramMatrix, TSIRELSON,
};
use uncnl::sdp::RealMatrix;

fn main() {
    // Generators: pairwise anticommuting, squaring to one.
    let gammas = clifford_generators(4).expect("generators");
    println!("4 Clifford generators in dimension {}:", gammas[0].rows());
    for (i, a) in gammas.iter().enumerate() {
        for (j, b) in gammas.iter().enumerate().skip(i + 1) {
            let anti = a.mul(b).add(&b.mul(a)).frobenius_norm();
            assert!(anti < 1e-12, "anticommutator ({i},{j})");
        }
    }
    println!("  pairwise anticommutators vanish");

    // Forward direction: the optimal CHSH setup contracts to Tsirelson.
    let setup = BipartiteSetup::optimal_qubit().unwrap();
    let g = gram_from_setup(
        &setup.state,
        &[setup.x.observable().unwrap(), setup.y.observable().unwrap()],
        &[setup.r.observable().unwrap(), setup.s.observable().unwrap()],
    )
    .expect("gram");
    let beta = chsh_weight().dot(g.entries());
    println!("\ngram of the optimal setup contracts to tr(W G) = {beta:.9}");
    assert!((beta - TSIRELSON).abs() < 1e-10);

    // Converse direction: random Gram matrices lift to physical setups
    // that reproduce every entry.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let mut a = RealMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                a.set(i, j, rng.gen::<f64>() - 0.5);
            }
        }
        let raw = a.mul(&a.transpose());
        let mut unit = RealMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                unit.set(i, j, raw.get(i, j) / (raw.get(i, i) * raw.get(j, j)).sqrt());
            }
        }
        let gm = GramMatrix::new(unit.symmetrize(), 2, 2).expect("gram matrix");
        let (state, obs_a, obs_b) = realize_from_gram(&gm).expect("realization");
        let back = gram_from_setup(&state, &obs_a, &obs_b).expect("round trip");
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((back.get(i, j) - gm.get(i, j)).abs());
            }
        }
    }
    println!("50 random Gram matrices realized; worst entry error {worst:.2e}");
    assert!(worst < 1e-8);
    println!("\nall checks passed");
}
