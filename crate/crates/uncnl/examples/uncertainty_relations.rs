//! Entropic uncertainty with quantum memories: the sum of conditional
//! entropies of two measurement outcomes is bounded below by the
//! effective overlap of the measurements, which can be strictly
//! smaller than the raw Maassen-Uffink overlap.
//!
//! Run with `cargo run --example uncertainty_relations`.

use num_complex::Complex64;
use uncnl::entropy::{check_ucr_minmax, check_ucr_vn, Verdict};
use uncnl::linalg::ComplexMatrix;
use uncnl::overlap::effective_overlap_ub;
use uncnl::quantum::{
    random_binary_projective, random_pure_tripartite, BinaryPovm, DensityOperator,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn main() {
    // A three-level pair sharing one outcome: the raw overlap is 1
    // (vacuous bound) but the effective overlap stays close to 1/2 when
    // the shared outcome is rare.
    let s = 1.0 / 2f64.sqrt();
    let m0 = ComplexMatrix::outer(&[c(1.), c(0.), c(0.)], &[c(1.), c(0.), c(0.)]);
    let n0 = ComplexMatrix::outer(&[c(s), c(s), c(0.)], &[c(s), c(s), c(0.)]);
    let x = BinaryPovm::new(m0.clone(), ComplexMatrix::identity(3).sub(&m0)).unwrap();
    let y = BinaryPovm::new(n0.clone(), ComplexMatrix::identity(3).sub(&n0)).unwrap();

    println!("shared-outcome example (weight eps on the common outcome):");
    println!("eps    mu overlap   effective    guaranteed bits");
    for eps in [0.0, 0.1, 0.5] {
        let rho = DensityOperator::new(
            ComplexMatrix::diag(&[(1.0 - eps) / 2.0, (1.0 - eps) / 2.0, eps]),
            vec![3],
        )
        .unwrap();
        let rep = effective_overlap_ub(&rho, &x, &y).unwrap();
        println!(
            "{eps:.1}    {:.6}     {:.6}     {:.6}",
            rep.mu_overlap,
            rep.effective_overlap_ub(),
            -rep.effective_overlap_ub().log2()
        );
        assert!((rep.effective_overlap_ub() - ((1.0 - eps) / 2.0 + eps)).abs() < 1e-9);
        assert!((rep.mu_overlap - 1.0).abs() < 1e-9);
    }

    // Random tripartite states with random measurement pairs: the von
    // Neumann and the min/max-entropy relations hold instance by
    // instance.
    println!("\n100 random tripartite instances:");
    let mut tightest = f64::INFINITY;
    for t in 0..100u64 {
        let rho = random_pure_tripartite(&[2, 2, 2], 600_000 + t).unwrap();
        let x = random_binary_projective(2, 700_000 + t)
            .unwrap()
            .to_binary_povm()
            .unwrap();
        let y = random_binary_projective(2, 800_000 + t)
            .unwrap()
            .to_binary_povm()
            .unwrap();
        let rho_a = rho.marginal(&[0]).unwrap();
        let ub = effective_overlap_ub(&rho_a, &x, &y)
            .unwrap()
            .effective_overlap_ub();

        let vn = check_ucr_vn(&rho, &x, &y, ub).unwrap();
        assert_eq!(
            vn.verdict,
            Verdict::Pass,
            "instance {t}: slack {}",
            vn.slack
        );
        tightest = tightest.min(vn.slack);

        if t % 5 == 0 {
            let mm = check_ucr_minmax(&rho, &x, &y, ub, 1.0).unwrap();
            assert_eq!(mm.verdict, Verdict::Pass, "instance {t} (min/max)");
        }
    }
    println!("  all passed; tightest von Neumann slack {tightest:.6} bits");
    println!("\nall checks passed");
}
