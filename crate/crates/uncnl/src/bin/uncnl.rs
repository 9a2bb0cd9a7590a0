//! Batch front-end: every subcommand reads files or flags, calls the
//! library, and emits JSON (or CSV for `curve`) with full-precision
//! floats. Randomized subcommands require an explicit `--seed`.
//!
//! Exit codes: 0 success, 1 domain error (JSON object on stderr),
//! 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;

use uncnl::certify::{estimate, simulate_rounds_with_threads};
use uncnl::entropy::{cond_von_neumann, max_entropy, min_entropy_detailed, von_neumann};
use uncnl::io;
use uncnl::nonlocality::{
    beta_bound_from_overlap, beta_max_analytic, beta_max_problem, chsh_value, di_uncertainty_bound,
    overlap_bound_from_beta, realize_from_gram, tradeoff_curve, BipartiteSetup,
};
use uncnl::overlap::effective_overlap_ub;
use uncnl::quantum::BinaryPovm;
use uncnl::sdp::{verify_certificate, SdpSolver};
use uncnl::suites::{run_suite, SuiteOutcome, SUITE_NAMES};
use uncnl::{Error, Result};

#[derive(Parser)]
#[command(
    name = "uncnl",
    version,
    about = "Entropic uncertainty and CHSH nonlocality toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Overlap quantities of a measurement setup (state + X + Y)
    Overlap {
        #[arg(long)]
        setup: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CHSH value of a bipartite setup (state + X, Y, R, S)
    Chsh {
        #[arg(long)]
        setup: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert between CHSH value, overlap bound and uncertainty bits
    #[command(group(ArgGroup::new("query").required(true).args(["beta", "cstar"])))]
    Bound {
        /// CHSH value to convert into an overlap/uncertainty bound
        #[arg(long)]
        beta: Option<f64>,
        /// Effective overlap to convert into a CHSH bound
        #[arg(long)]
        cstar: Option<f64>,
    },
    /// Realize a Gram matrix as a state plus binary measurements
    Realize {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal CHSH value at fixed observable overlap: SDP and closed form
    Betamax {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropies of a state file (von Neumann; min/max when bipartite)
    Entropy {
        #[arg(long)]
        setup: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Monte Carlo invariant suites
    Verify {
        /// Suite name or "all"
        #[arg(long)]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: u64,
        /// Worker threads for running suites concurrently
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Simulate certification rounds and estimate the overlap
    Certify {
        #[arg(long)]
        rounds: u64,
        #[arg(long)]
        seed: u64,
        /// One-sided confidence level for the overlap bound
        #[arg(long, default_value_t = 0.99)]
        ci: f64,
        /// Bipartite setup file; defaults to the ideal CHSH setup
        #[arg(long)]
        setup: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the overlap/uncertainty-versus-CHSH curve as CSV
    Curve {
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Report-level pass tolerance override.
fn env_tol() -> f64 {
    std::env::var("UNCNL_TOL")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(uncnl::DEFAULT_PASS_TOL)
}

/// Prints a line, treating a closed pipe as a normal early exit.
fn print_line(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if writeln!(stdout, "{text}").is_err() {
        std::process::exit(0);
    }
}

/// Writes the primary output: to `out` when given, stdout otherwise.
fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => {
            print_line(text);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OverlapOut {
    mu_overlap: f64,
    sliced: f64,
    gamma: f64,
    method: uncnl::overlap::OverlapMethod,
    effective_overlap_ub: f64,
}

#[derive(Serialize)]
struct BetamaxOut {
    gamma: f64,
    analytic: f64,
    sdp_value: f64,
    sdp_dual_value: f64,
    sdp_gap: f64,
    status: uncnl::sdp::SdpStatus,
    iterations: usize,
    certificate: uncnl::sdp::CertificateReport,
}

#[derive(Serialize)]
struct EntropyOut {
    dims: Vec<usize>,
    von_neumann: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cond_von_neumann: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_entropy_sdp_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_entropy: Option<f64>,
}

#[derive(Serialize)]
struct VerifyOut {
    suites: Vec<SuiteOutcome>,
    all_pass: bool,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Overlap { setup, out } => {
            let (state, x, y) = io::load_measurement_setup(&setup)?;
            let rep = effective_overlap_ub(&state, &x, &y)?;
            let json = io::to_json(&OverlapOut {
                mu_overlap: rep.mu_overlap,
                sliced: rep.sliced,
                gamma: rep.gamma,
                method: rep.method,
                effective_overlap_ub: rep.effective_overlap_ub(),
            })?;
            emit(&json, &out)?;
        }
        Command::Chsh { setup, out } => {
            let setup = io::load_bipartite_setup(&setup)?;
            let beta = chsh_value(&setup)?;
            emit(
                &io::to_json(&serde_json::json!({ "chsh_value": beta }))?,
                &out,
            )?;
        }
        Command::Bound { beta, cstar } => {
            let json = if let Some(beta) = beta {
                let c = overlap_bound_from_beta(beta)?;
                let q = di_uncertainty_bound(beta)?;
                io::to_json(&serde_json::json!({ "cstar_bound": c, "q_bits": q }))?
            } else {
                let c = cstar.expect("clap group guarantees one of beta/cstar");
                if c < 0.5 {
                    eprintln!(
                        "warning: overlap {c} below 1/2 is unreachable for binary projective pairs"
                    );
                }
                io::to_json(&serde_json::json!({ "beta_bound": beta_bound_from_overlap(c)? }))?
            };
            emit(&json, &None)?;
        }
        Command::Realize { gram, out } => {
            let gm = io::load_gram(&gram)?;
            let (n, m) = gm.partition();
            if n < 2 || m < 2 {
                return Err(Error::Parameter(format!(
                    "need at least two observables per side to build a setup, got ({n}, {m})"
                )));
            }
            let (state, obs_a, obs_b) = realize_from_gram(&gm)?;
            let setup = BipartiteSetup::new(
                state,
                BinaryPovm::from_observable(&obs_a[0])?,
                BinaryPovm::from_observable(&obs_a[1])?,
                BinaryPovm::from_observable(&obs_b[0])?,
                BinaryPovm::from_observable(&obs_b[1])?,
            )?;
            match out {
                Some(path) => {
                    io::write_bipartite_setup(&path, &setup)?;
                    print_line(&io::to_json(&serde_json::json!({
                        "written": path.display().to_string(),
                        "rep_dim": setup.state.dims()[0],
                    }))?);
                }
                None => {
                    let json = io::SetupJson {
                        state: io::MatrixJson::from_matrix(setup.state.mat()),
                        dims: setup.state.dims().to_vec(),
                        x: Some(io::PovmJson::from_povm(&setup.x)),
                        y: Some(io::PovmJson::from_povm(&setup.y)),
                        r: Some(io::PovmJson::from_povm(&setup.r)),
                        s: Some(io::PovmJson::from_povm(&setup.s)),
                    };
                    print_line(&io::to_json(&json)?);
                }
            }
        }
        Command::Betamax { gamma, out } => {
            let problem = beta_max_problem(gamma)?;
            let sol = SdpSolver::new().solve(&problem)?;
            let certificate = verify_certificate(&problem, &sol, env_tol());
            let json = io::to_json(&BetamaxOut {
                gamma,
                analytic: beta_max_analytic(gamma)?,
                sdp_value: sol.primal_value,
                sdp_dual_value: sol.dual_value,
                sdp_gap: sol.gap,
                status: sol.status,
                iterations: sol.iterations,
                certificate,
            })?;
            emit(&json, &out)?;
        }
        Command::Entropy { setup, out } => {
            let state = io::load_state(&setup)?;
            let mut report = EntropyOut {
                dims: state.dims().to_vec(),
                von_neumann: von_neumann(&state)?,
                cond_von_neumann: None,
                min_entropy: None,
                min_entropy_sdp_gap: None,
                max_entropy: None,
            };
            if state.dims().len() == 2 {
                report.cond_von_neumann = Some(cond_von_neumann(&state)?);
                let info = min_entropy_detailed(&state)?;
                report.min_entropy = Some(info.hmin_bits);
                report.min_entropy_sdp_gap = Some(info.sdp_gap);
                report.max_entropy = Some(max_entropy(&state)?);
            }
            emit(&io::to_json(&report)?, &out)?;
        }
        Command::Verify {
            suite,
            trials,
            seed,
            threads,
        } => {
            let tol = env_tol();
            let names: Vec<&str> = if suite == "all" {
                SUITE_NAMES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let workers = threads.unwrap_or(1).max(1);
            let mut outcomes: Vec<SuiteOutcome> = Vec::with_capacity(names.len());
            for chunk in names.chunks(workers) {
                let mut batch: Vec<Result<SuiteOutcome>> = Vec::new();
                std::thread::scope(|scope| {
                    let handles: Vec<_> = chunk
                        .iter()
                        .map(|name| scope.spawn(move || run_suite(name, trials, seed, tol)))
                        .collect();
                    for h in handles {
                        batch.push(h.join().expect("suite worker panicked"));
                    }
                });
                for b in batch {
                    outcomes.push(b?);
                }
            }
            for o in &outcomes {
                print_line(&format!(
                    "suite {}: {} trials, {} failures: {}",
                    o.name,
                    o.trials,
                    o.failures,
                    if o.passed { "PASS" } else { "FAIL" }
                ));
            }
            let all_pass = outcomes.iter().all(|o| o.passed);
            print_line(&io::to_json(&VerifyOut {
                suites: outcomes,
                all_pass,
            })?);
            return Ok(all_pass);
        }
        Command::Certify {
            rounds,
            seed,
            ci,
            setup,
            threads,
            out,
        } => {
            let setup = match setup {
                Some(path) => io::load_bipartite_setup(&path)?,
                None => BipartiteSetup::optimal_qubit()?,
            };
            let tally = simulate_rounds_with_threads(&setup, rounds, seed, threads.unwrap_or(1))?;
            let report = estimate(&tally, ci)?;
            emit(&io::to_json(&report)?, &out)?;
        }
        Command::Curve { samples, out } => {
            let rows = tradeoff_curve(samples)?;
            let mut csv = String::from("beta,cstar_bound,q_bits\n");
            for r in rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    io::fmt_f64(r.beta),
                    io::fmt_f64(r.cstar_bound),
                    io::fmt_f64(r.q_bits)
                ));
            }
            emit(csv.trim_end(), &out)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let obj = serde_json::json!({ "error": e.to_string(), "kind": e.kind() });
            eprintln!("{obj}");
            ExitCode::from(1)
        }
    }
}
