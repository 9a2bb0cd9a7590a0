//! Monte Carlo invariant suites behind `uncnl verify`.
//!
//! Each suite runs a deterministic batch of randomized instances for
//! one of the core inequalities or round-trip identities and reports
//! per-instance failures. Seeds derive from the caller's seed plus the
//! instance index, so runs are reproducible and instances independent.

use serde::Serialize;

use crate::entropy::{check_ucr_minmax, check_ucr_vn, min_entropy_detailed, Verdict};
use crate::linalg::{herm_eig, kron, operator_norm, partial_trace, ComplexMatrix};
use crate::nonlocality::{
    beta_bound_from_overlap, beta_max_analytic, beta_max_dual_certificate,
    beta_max_primal_certificate, beta_max_problem, beta_max_sdp, chsh_value, chsh_weight,
    gram_from_setup, overlap_bound_from_beta, realize_from_gram, BipartiteSetup, GramMatrix,
};
use crate::overlap::effective_overlap_ub;
use crate::quantum::{
    measure_cq, purify, random_binary_projective, random_pure_tripartite, random_state,
    rng_from_seed, BinaryPovm, DensityOperator,
};
use crate::sdp::{verify_certificate, RealMatrix, SdpSolution};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

pub const SUITE_NAMES: [&str; 6] = ["theorem1", "theorem2", "theorem3", "gram", "sdp", "lemma1"];

/// Result of one invariant suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// First few failure descriptions.
    pub notes: Vec<String>,
    pub passed: bool,
}

impl SuiteOutcome {
    fn collect(name: &str, trials: usize, failures: Vec<String>) -> Self {
        Self {
            name: name.into(),
            trials,
            passed: failures.is_empty(),
            failures: failures.len(),
            notes: failures.into_iter().take(5).collect(),
        }
    }
}

/// Runs one suite by name. `trials` of `None` picks the suite default;
/// `tol` is the slack tolerance for the inequality checks.
pub fn run_suite(name: &str, trials: Option<usize>, seed: u64, tol: f64) -> Result<SuiteOutcome> {
    match name {
        "theorem1" => Ok(theorem1(trials.unwrap_or(200), seed, tol)),
        "theorem2" => Ok(theorem2(trials.unwrap_or(100), seed, tol)),
        "theorem3" => Ok(theorem3(trials.unwrap_or(500), seed, tol)),
        "gram" => Ok(gram(trials.unwrap_or(200), seed)),
        "sdp" => Ok(sdp(trials.unwrap_or(101))),
        "lemma1" => Ok(lemma1(trials.unwrap_or(200), seed)),
        other => Err(Error::Parameter(format!(
            "unknown suite {other:?}; available: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

fn random_projective_povm(dim: usize, seed: u64) -> BinaryPovm {
    random_binary_projective(dim, seed)
        .expect("projective generator")
        .to_binary_povm()
        .expect("projective binary POVM")
}

/// Shared-perp three-level example: overlap (1-eps)/2 + eps.
fn perp_instance(eps: f64) -> (DensityOperator, BinaryPovm, BinaryPovm) {
    let s = 1.0 / 2f64.sqrt();
    let c = |re: f64| Complex64::new(re, 0.0);
    let m0 = ComplexMatrix::outer(&[c(1.), c(0.), c(0.)], &[c(1.), c(0.), c(0.)]);
    let n0 = ComplexMatrix::outer(&[c(s), c(s), c(0.)], &[c(s), c(s), c(0.)]);
    let x = BinaryPovm::new(m0.clone(), ComplexMatrix::identity(3).sub(&m0)).unwrap();
    let y = BinaryPovm::new(n0.clone(), ComplexMatrix::identity(3).sub(&n0)).unwrap();
    let rho = DensityOperator::new(
        ComplexMatrix::diag(&[(1.0 - eps) / 2.0, (1.0 - eps) / 2.0, eps]),
        vec![3, 1, 1],
    )
    .unwrap();
    (rho, x, y)
}

/// Von Neumann uncertainty relation on random tripartite instances,
/// plus the shared-perp examples at eps in {0, 0.1, 0.5}.
pub fn theorem1(trials: usize, seed: u64, tol: f64) -> SuiteOutcome {
    let mut failures = Vec::new();
    for t in 0..trials {
        let s = seed.wrapping_add(t as u64);
        let run = || -> Result<(f64, Verdict)> {
            let rho = random_pure_tripartite(&[2, 2, 2], s)?;
            let x = random_projective_povm(2, s ^ 0x5555_5555);
            let y = random_projective_povm(2, s ^ 0xaaaa_aaaa);
            let rho_a = rho.marginal(&[0])?;
            let ub = effective_overlap_ub(&rho_a, &x, &y)?.effective_overlap_ub();
            let mut rep = check_ucr_vn(&rho, &x, &y, ub)?;
            rep.apply_tolerance(tol);
            Ok((rep.slack, rep.verdict))
        };
        match run() {
            Ok((_, Verdict::Pass)) => {}
            Ok((slack, Verdict::Fail)) => failures.push(format!("instance {t}: slack {slack:.3e}")),
            Err(e) => failures.push(format!("instance {t}: {e}")),
        }
    }
    for eps in [0.0, 0.1, 0.5] {
        let (rho, x, y) = perp_instance(eps);
        let rho_a = rho.marginal(&[0]).unwrap();
        match effective_overlap_ub(&rho_a, &x, &y) {
            Ok(rep) => {
                let expect = (1.0 - eps) / 2.0 + eps;
                if (rep.effective_overlap_ub() - expect).abs() > 1e-9 {
                    failures.push(format!(
                        "perp example eps={eps}: overlap {} vs {expect}",
                        rep.effective_overlap_ub()
                    ));
                } else {
                    let check = check_ucr_vn(&rho, &x, &y, rep.effective_overlap_ub());
                    match check {
                        Ok(r) if r.verdict == Verdict::Pass => {}
                        Ok(r) => failures.push(format!("perp eps={eps}: slack {:.3e}", r.slack)),
                        Err(e) => failures.push(format!("perp eps={eps}: {e}")),
                    }
                }
            }
            Err(e) => failures.push(format!("perp example eps={eps}: {e}")),
        }
    }
    SuiteOutcome::collect("theorem1", trials + 3, failures)
}

/// Min/max-entropy uncertainty relation at smoothing zero with
/// eps_bar = 1; also tracks the min-entropy SDP gaps.
pub fn theorem2(trials: usize, seed: u64, tol: f64) -> SuiteOutcome {
    let mut failures = Vec::new();
    for t in 0..trials {
        let s = seed.wrapping_add(0x1000_0000).wrapping_add(t as u64);
        let run = || -> Result<()> {
            let rho = random_pure_tripartite(&[2, 2, 2], s)?;
            let x = random_projective_povm(2, s ^ 0x1111_2222);
            let y = random_projective_povm(2, s ^ 0x3333_4444);
            let rho_a = rho.marginal(&[0])?;
            let ub = effective_overlap_ub(&rho_a, &x, &y)?.effective_overlap_ub();
            let mut rep = check_ucr_minmax(&rho, &x, &y, ub, 1.0)?;
            rep.apply_tolerance(tol);
            if rep.verdict != Verdict::Pass {
                return Err(Error::Parameter(format!("slack {:.3e}", rep.slack)));
            }
            // Gap audit on both SDP solves.
            let rho_xb = measure_cq(&rho.marginal(&[0, 1])?, &x, 0)?.joint()?;
            let info = min_entropy_detailed(&rho_xb)?;
            if info.sdp_gap > 1e-7 {
                return Err(Error::Sdp(format!("min-entropy gap {:.3e}", info.sdp_gap)));
            }
            let rho_yc = measure_cq(&rho.marginal(&[0, 2])?, &y, 0)?.joint()?;
            let pure = purify(&rho_yc)?;
            let info = min_entropy_detailed(&pure.marginal(&[0, 2])?)?;
            if info.sdp_gap > 1e-7 {
                return Err(Error::Sdp(format!("max-entropy gap {:.3e}", info.sdp_gap)));
            }
            Ok(())
        };
        if let Err(e) = run() {
            failures.push(format!("instance {t}: {e}"));
        }
    }
    SuiteOutcome::collect("theorem2", trials, failures)
}

/// CHSH value versus effective overlap on random bipartite setups,
/// alternating qubit and two-qubit local dimensions.
pub fn theorem3(trials: usize, seed: u64, tol: f64) -> SuiteOutcome {
    let mut failures = Vec::new();
    for t in 0..trials {
        let s = seed.wrapping_add(0x2000_0000).wrapping_add(t as u64);
        let d = if t % 2 == 0 { 2 } else { 4 };
        let run = || -> Result<()> {
            let state = random_state(d * d, d * d, s)?.regroup(vec![d, d])?;
            let setup = BipartiteSetup::new(
                state,
                random_projective_povm(d, s ^ 0x0101),
                random_projective_povm(d, s ^ 0x0202),
                random_projective_povm(d, s ^ 0x0303),
                random_projective_povm(d, s ^ 0x0404),
            )?;
            let beta = chsh_value(&setup)?;
            let rho_a = setup.state.marginal(&[0])?;
            let c_hat = effective_overlap_ub(&rho_a, &setup.x, &setup.y)?.effective_overlap_ub();
            let beta_bound = beta_bound_from_overlap(c_hat)?;
            if beta > beta_bound + tol {
                return Err(Error::Parameter(format!(
                    "beta {beta:.9} exceeds bound {beta_bound:.9} at overlap {c_hat:.9}"
                )));
            }
            let c_bound = overlap_bound_from_beta(beta)?;
            if c_hat > c_bound + tol {
                return Err(Error::Parameter(format!(
                    "overlap {c_hat:.9} exceeds bound {c_bound:.9} at beta {beta:.9}"
                )));
            }
            Ok(())
        };
        if let Err(e) = run() {
            failures.push(format!("instance {t} (d={d}): {e}"));
        }
    }
    SuiteOutcome::collect("theorem3", trials, failures)
}

fn random_unit_diag_gram(d: usize, seed: u64) -> Result<GramMatrix> {
    let mut rng = rng_from_seed(seed);
    let mut a = RealMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a.set(i, j, rng.gen::<f64>() - 0.5);
        }
    }
    let g = a.mul(&a.transpose());
    let mut out = RealMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, g.get(i, j) / (g.get(i, i) * g.get(j, j)).sqrt());
        }
    }
    GramMatrix::new(out.symmetrize(), d / 2, d - d / 2)
}

/// Tsirelson realization round trip on random unit-diagonal Gram
/// matrices: every entry reproduced to 1e-8, observables square to 1
/// within 1e-9.
pub fn gram(trials: usize, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    for t in 0..trials {
        let s = seed.wrapping_add(0x3000_0000).wrapping_add(t as u64);
        let run = || -> Result<()> {
            let gm = random_unit_diag_gram(4, s)?;
            let (state, obs_a, obs_b) = realize_from_gram(&gm)?;
            for o in obs_a.iter().chain(&obs_b) {
                let dev = operator_norm(
                    &o.mat()
                        .mul(o.mat())
                        .sub(&ComplexMatrix::identity(o.dim()))
                        .hermitian_part(),
                )?;
                if dev > 1e-9 {
                    return Err(Error::Parameter(format!("||O^2 - 1|| = {dev:.3e}")));
                }
            }
            let back = gram_from_setup(&state, &obs_a, &obs_b)?;
            for i in 0..4 {
                for j in 0..4 {
                    let err = (back.get(i, j) - gm.get(i, j)).abs();
                    if err > 1e-8 {
                        return Err(Error::Parameter(format!(
                            "entry ({i},{j}) off by {err:.3e}"
                        )));
                    }
                }
            }
            Ok(())
        };
        if let Err(e) = run() {
            failures.push(format!("instance {t}: {e}"));
        }
    }
    SuiteOutcome::collect("gram", trials, failures)
}

/// The constrained-correlation SDP family: solver versus closed form on
/// a gamma grid, closed-form certificates, weak duality.
pub fn sdp(grid: usize) -> SuiteOutcome {
    let mut failures = Vec::new();
    let grid = grid.max(2);
    for k in 0..grid {
        let gamma = k as f64 / (grid - 1) as f64;
        let run = || -> Result<()> {
            let sol = beta_max_sdp(gamma)?;
            let expect = beta_max_analytic(gamma)?;
            if (sol.primal_value - expect).abs() > 1e-6 {
                return Err(Error::Sdp(format!(
                    "value {:.9} vs closed form {expect:.9} (status {:?})",
                    sol.primal_value, sol.status
                )));
            }
            if sol.primal_value > sol.dual_value + 1e-7 {
                return Err(Error::Sdp(format!(
                    "weak duality violated: {} > {}",
                    sol.primal_value, sol.dual_value
                )));
            }
            Ok(())
        };
        if let Err(e) = run() {
            failures.push(format!("gamma {gamma}: {e}"));
        }
    }
    for gamma in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let run = || -> Result<()> {
            let problem = beta_max_problem(gamma)?;
            let pair = SdpSolution::from_parts(
                &problem,
                beta_max_primal_certificate(gamma)?,
                beta_max_dual_certificate(gamma)?,
            )?;
            let expect = beta_max_analytic(gamma)?;
            if (chsh_weight().dot(&beta_max_primal_certificate(gamma)?) - expect).abs() > 1e-12 {
                return Err(Error::Sdp("primal certificate objective drifted".into()));
            }
            let report = verify_certificate(&problem, &pair, 1e-9);
            if !report.all_pass {
                return Err(Error::Sdp(format!("certificate checks failed: {report:?}")));
            }
            Ok(())
        };
        if let Err(e) = run() {
            failures.push(format!("certificate at gamma {gamma}: {e}"));
        }
    }
    SuiteOutcome::collect("sdp", grid + 5, failures)
}

/// Partial-trace norm bound: for Kraus sets {E_k} and PSD M_AB,
/// tr_A(sum E M E^dag) <= ||sum E^dag E|| tr_A(M) as operators.
pub fn lemma1(trials: usize, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let dims_pool = [(2usize, 2usize), (2, 3), (3, 2), (2, 4), (4, 2)];
    for t in 0..trials {
        let s = seed.wrapping_add(0x4000_0000).wrapping_add(t as u64);
        let run = || -> Result<()> {
            let mut rng = rng_from_seed(s);
            let (da, db) = dims_pool[rng.gen_range(0..dims_pool.len())];
            let n_kraus = rng.gen_range(1..=4);
            let m = random_state(da * db, da * db, s ^ 0x9e37_79b9)?;

            let mut lhs_full = ComplexMatrix::zeros(da * db, da * db);
            let mut gram = ComplexMatrix::zeros(da, da);
            for _ in 0..n_kraus {
                let e = ComplexMatrix::from_fn(da, da, |_, _| {
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                let lifted = kron(&e, &ComplexMatrix::identity(db))?;
                lhs_full = lhs_full.add(&lifted.mul(m.mat()).mul(&lifted.adjoint()));
                gram = gram.add(&e.adjoint().mul(&e));
            }
            let lhs = partial_trace(&lhs_full, &[da, db], &[1])?;
            let bound = operator_norm(&gram.hermitian_part())?;
            let rhs = partial_trace(m.mat(), &[da, db], &[1])?.scale_re(bound);
            let slack = herm_eig(&rhs.sub(&lhs).hermitian_part())?.eigenvalues[0];
            if slack < -1e-9 {
                return Err(Error::Parameter(format!("operator slack {slack:.3e}")));
            }
            Ok(())
        };
        if let Err(e) = run() {
            failures.push(format!("instance {t}: {e}"));
        }
    }
    SuiteOutcome::collect("lemma1", trials, failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_of_every_suite_pass() {
        for name in SUITE_NAMES {
            let trials = if name == "sdp" { Some(11) } else { Some(8) };
            let out = run_suite(name, trials, 12345, 1e-7).unwrap();
            assert!(out.passed, "{name}: {:?}", out.notes);
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("theorem9", None, 1, 1e-7).is_err());
    }
}
