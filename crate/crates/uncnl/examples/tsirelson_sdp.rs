//! The constrained-correlation semidefinite program: the maximal CHSH
//! value at fixed observable overlap gamma* has the closed form
//! 2(sqrt(g) + sqrt(1-g)), certified by explicit primal and dual
//! feasible points.
//!
//! Run with `cargo run --example tsirelson_sdp --release`.

use uncnl::nonlocality::{
    beta_max_analytic, beta_max_dual_certificate, beta_max_primal_certificate, beta_max_problem,
    beta_max_sdp,
};
use uncnl::sdp::{verify_certificate, SdpSolution};

fn main() {
    println!("gamma*   SDP value      closed form    |diff|     gap");
    let mut worst = 0.0_f64;
    for k in 0..=20 {
        let gamma = k as f64 / 20.0;
        let sol = beta_max_sdp(gamma).expect("sdp solve");
        let exact = beta_max_analytic(gamma).unwrap();
        let diff = (sol.primal_value - exact).abs();
        worst = worst.max(diff);
        println!(
            "{gamma:.2}     {:.9}    {:.9}    {:.1e}    {:.1e}",
            sol.primal_value, exact, diff, sol.gap
        );
        assert!(diff < 1e-6, "gamma {gamma}");
        assert!(sol.primal_value <= sol.dual_value + 1e-7, "weak duality");
    }
    println!("worst deviation from the closed form: {worst:.2e}");

    // Certificate pairs close the loop without running the solver.
    println!("\nclosed-form certificates:");
    for gamma in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let problem = beta_max_problem(gamma).unwrap();
        let pair = SdpSolution::from_parts(
            &problem,
            beta_max_primal_certificate(gamma).unwrap(),
            beta_max_dual_certificate(gamma).unwrap(),
        )
        .unwrap();
        let report = verify_certificate(&problem, &pair, 1e-9);
        println!(
            "  gamma {gamma:.2}: primal {:.9} = dual {:.9}, all checks pass: {}",
            pair.primal_value, pair.dual_value, report.all_pass
        );
        assert!(report.all_pass);
        assert!((pair.primal_value - beta_max_analytic(gamma).unwrap()).abs() < 1e-12);
    }
    println!("\nall checks passed");
}
