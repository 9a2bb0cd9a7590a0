//! Certification of BB84-type entangled sources with an untrusted CHSH
//! test device: i.i.d. round simulation, success tallies, and the
//! overlap estimate with a one-sided confidence bound.
//!
//! Rounds draw uniform independent inputs on both sides and sample
//! outcomes from the joint Born distribution. Randomness comes from
//! counter-based per-round substreams of one ChaCha stream, so tallies
//! are bit-identical for any thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::linalg::kron;
use crate::nonlocality::{overlap_bound_from_beta, BipartiteSetup, TSIRELSON};
use crate::{Error, Result};

/// The CHSH winning condition: outputs must agree unless both inputs
/// are 1.
pub fn chsh_success(a_input: bool, d_input: bool, a_out: bool, d_out: bool) -> bool {
    (a_out == d_out) ^ (a_input && d_input)
}

/// Round counts of a certification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificationTally {
    pub rounds: u64,
    pub successes: u64,
    /// `counts[a_input][d_input][a_out][d_out]`
    pub counts: [[[[u64; 2]; 2]; 2]; 2],
    pub seed: u64,
}

impl CertificationTally {
    pub fn success_fraction(&self) -> f64 {
        self.successes as f64 / self.rounds as f64
    }

    /// Rounds observed for one input pair.
    pub fn pair_total(&self, a_input: usize, d_input: usize) -> u64 {
        let block = &self.counts[a_input][d_input];
        block.iter().flatten().sum()
    }

    fn merge(&mut self, other: &CertificationTally) {
        self.rounds += other.rounds;
        self.successes += other.successes;
        for a in 0..2 {
            for d in 0..2 {
                for ao in 0..2 {
                    for dd in 0..2 {
                        self.counts[a][d][ao][dd] += other.counts[a][d][ao][dd];
                    }
                }
            }
        }
    }
}

/// Joint outcome distributions, one per input pair.
fn joint_distributions(setup: &BipartiteSetup) -> Result<[[[f64; 4]; 2]; 2]> {
    let mut out = [[[0.0; 4]; 2]; 2];
    for (a, alice) in [&setup.x, &setup.y].into_iter().enumerate() {
        for (d, david) in [&setup.r, &setup.s].into_iter().enumerate() {
            let mut total = 0.0;
            for ao in 0..2 {
                for dd in 0..2 {
                    let p = kron(alice.element(ao), david.element(dd))?
                        .mul(setup.state.mat())
                        .trace_re()
                        .max(0.0);
                    out[a][d][2 * ao + dd] = p;
                    total += p;
                }
            }
            for p in out[a][d].iter_mut() {
                *p /= total;
            }
        }
    }
    Ok(out)
}

fn run_range(
    dists: &[[[f64; 4]; 2]; 2],
    base: &ChaCha8Rng,
    range: std::ops::Range<u64>,
    seed: u64,
) -> CertificationTally {
    let mut tally = CertificationTally {
        rounds: 0,
        successes: 0,
        counts: [[[[0; 2]; 2]; 2]; 2],
        seed,
    };
    for round in range {
        let mut rng = base.clone();
        rng.set_stream(round);
        let a = (rng.gen::<u32>() & 1) as usize;
        let d = (rng.gen::<u32>() & 1) as usize;
        let u: f64 = rng.gen();
        let dist = &dists[a][d];
        let mut acc = 0.0;
        let mut outcome = 3usize;
        for (k, p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                outcome = k;
                break;
            }
        }
        let (ao, dd) = (outcome / 2, outcome % 2);
        tally.rounds += 1;
        tally.counts[a][d][ao][dd] += 1;
        if chsh_success(a == 1, d == 1, ao == 1, dd == 1) {
            tally.successes += 1;
        }
    }
    tally
}

/// Simulates `n` i.i.d. certification rounds.
pub fn simulate_rounds(setup: &BipartiteSetup, n: u64, seed: u64) -> Result<CertificationTally> {
    simulate_rounds_with_threads(setup, n, seed, 1)
}

/// Same simulation, split across `threads` workers over disjoint round
/// ranges; the merged tally does not depend on the split.
pub fn simulate_rounds_with_threads(
    setup: &BipartiteSetup,
    n: u64,
    seed: u64,
    threads: usize,
) -> Result<CertificationTally> {
    if n == 0 {
        return Err(Error::Parameter("need at least one round".into()));
    }
    let dists = joint_distributions(setup)?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let threads = threads.max(1).min(n as usize);

    if threads == 1 {
        return Ok(run_range(&dists, &base, 0..n, seed));
    }
    let chunk = n.div_ceil(threads as u64);
    let mut partials: Vec<CertificationTally> = Vec::with_capacity(threads);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let lo = chunk * t as u64;
            let hi = (lo + chunk).min(n);
            if lo >= hi {
                continue;
            }
            let dists = &dists;
            let base = &base;
            handles.push(scope.spawn(move || run_range(dists, base, lo..hi, seed)));
        }
        for h in handles {
            partials.push(h.join().expect("simulation worker panicked"));
        }
    });
    let mut total = partials.remove(0);
    for p in &partials {
        total.merge(p);
    }
    total.seed = seed;
    Ok(total)
}

/// Point estimates and the confidence bound derived from a tally.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    #[serde(rename = "N")]
    pub rounds: u64,
    #[serde(rename = "k")]
    pub successes: u64,
    pub p_hat: f64,
    pub beta_hat: f64,
    pub cstar_hat: f64,
    pub q_hat_bits: f64,
    pub ci_level: f64,
    pub cstar_ci_upper: f64,
    pub verdict: String,
}

/// One-sided Clopper-Pearson lower confidence bound on a binomial
/// success probability.
fn clopper_pearson_lower(k: u64, n: u64, level: f64) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    if k == n {
        // Exact lower bound (1 - level)^(1/n).
        return Ok((1.0 - level).powf(1.0 / n as f64));
    }
    let beta = Beta::new(k as f64, (n - k + 1) as f64)
        .map_err(|e| Error::Parameter(format!("beta distribution: {e}")))?;
    Ok(beta.inverse_cdf(1.0 - level))
}

/// Turns a tally into the overlap certificate:
/// beta = 8p - 4, c* = 1/2 + (beta/8) sqrt(8 - beta^2), q = -log2 c*,
/// with a Clopper-Pearson lower bound on p propagated through the
/// decreasing branch of the c* formula.
pub fn estimate(tally: &CertificationTally, ci_level: f64) -> Result<CertificationReport> {
    if !(0.0 < ci_level && ci_level < 1.0) {
        return Err(Error::Parameter(format!(
            "confidence level {ci_level} outside (0, 1)"
        )));
    }
    if tally.rounds == 0 || tally.successes > tally.rounds {
        return Err(Error::Parameter("malformed tally".into()));
    }
    let p_hat = tally.success_fraction();
    let beta_hat = 8.0 * p_hat - 4.0;

    let mut report = CertificationReport {
        rounds: tally.rounds,
        successes: tally.successes,
        p_hat,
        beta_hat,
        cstar_hat: 1.0,
        q_hat_bits: 0.0,
        ci_level,
        cstar_ci_upper: 1.0,
        verdict: String::new(),
    };

    if p_hat <= 0.5 {
        report.verdict = "no certificate: success fraction at or below 1/2".into();
        return Ok(report);
    }

    // Success fractions beyond the quantum maximum (possible by
    // fluctuation) clamp 2p - 1 to 1/sqrt(2).
    let clamped = beta_hat > TSIRELSON;
    let beta_eff = beta_hat.min(TSIRELSON);
    report.cstar_hat = overlap_bound_from_beta(beta_eff)?;
    report.q_hat_bits = 0.0 - report.cstar_hat.log2();

    let p_lo = clopper_pearson_lower(tally.successes, tally.rounds, ci_level)?;
    let beta_lo = (8.0 * p_lo - 4.0).min(TSIRELSON);
    report.cstar_ci_upper = overlap_bound_from_beta(beta_lo.max(0.0))?;

    report.verdict = if clamped {
        format!(
            "success fraction exceeds the quantum maximum (fluctuation); clamped to beta = 2*sqrt(2); \
             effective overlap <= {:.6} at one-sided confidence {}",
            report.cstar_ci_upper, ci_level
        )
    } else if report.cstar_ci_upper < 1.0 {
        format!(
            "effective overlap <= {:.6} at one-sided confidence {}",
            report.cstar_ci_upper, ci_level
        )
    } else {
        "point estimate only: confidence bound is vacuous at this sample size".into()
    };
    Ok(report)
}
