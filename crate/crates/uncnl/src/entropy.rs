//! Entropic quantities: Shannon and von Neumann entropies, conditional
//! min- and max-entropy via SDP, relative max-entropy, and the
//! uncertainty-relation verifiers.
//!
//! Conventions: all entropies are in bits; `0 log 0 = 0` and
//! eigenvalues below 1e-14 count as exact zeros.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{operator_norm, psd_eig, ComplexMatrix};
use crate::quantum::{measure_cq, purify, BinaryPovm, DensityOperator};
use crate::sdp::{RealMatrix, SdpProblem, SdpSolver, SdpStatus, Sense};
use crate::{Error, Result, DEFAULT_PASS_TOL};

const ZERO_EIG: f64 = 1e-14;

fn xlog2x(p: f64) -> f64 {
    if p < ZERO_EIG {
        0.0
    } else {
        p * p.log2()
    }
}

/// Shannon entropy of a probability distribution, in bits.
pub fn shannon(dist: &[f64]) -> Result<f64> {
    if dist.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
        return Err(Error::Parameter(
            "negative or non-finite probability".into(),
        ));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("probabilities sum to {total}")));
    }
    Ok(-dist.iter().map(|&p| xlog2x(p.max(0.0))).sum::<f64>())
}

/// Von Neumann entropy H(rho) = -tr(rho log2 rho).
pub fn von_neumann(rho: &DensityOperator) -> Result<f64> {
    let (vals, _) = psd_eig(rho.mat(), "von_neumann")?;
    Ok(-vals.iter().map(|&l| xlog2x(l)).sum::<f64>())
}

/// Conditional von Neumann entropy H(A|B) = H(AB) - H(B) for a
/// bipartite state (dims [d_A, d_B]).
pub fn cond_von_neumann(rho_ab: &DensityOperator) -> Result<f64> {
    if rho_ab.dims().len() != 2 {
        return Err(Error::Shape(format!(
            "need bipartite dims, got {:?}",
            rho_ab.dims()
        )));
    }
    let rho_b = rho_ab.marginal(&[1])?;
    Ok(von_neumann(rho_ab)? - von_neumann(&rho_b)?)
}

/// Diagnostics of a conditional min-entropy computation.
#[derive(Debug, Clone, Serialize)]
pub struct MinEntropyInfo {
    pub hmin_bits: f64,
    /// Optimal value of max tr(rho X) s.t. tr_A X = 1_B, X >= 0.
    pub sdp_value: f64,
    pub sdp_gap: f64,
    pub iterations: usize,
}

/// The real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian
/// matrix; PSD and spectra are preserved (each eigenvalue doubled).
fn embed_hermitian(m: &ComplexMatrix) -> RealMatrix {
    let n = m.rows();
    let mut out = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            out.set(i, j, z.re);
            out.set(n + i, n + j, z.re);
            out.set(i, n + j, -z.im);
            out.set(n + i, j, z.im);
        }
    }
    out
}

/// Conditional min-entropy H_min(A|B) = -log2 min { tr(sigma) :
/// rho_AB <= 1_A (x) sigma_B }, computed through the equivalent
/// guessing-probability form max tr(rho X) s.t. tr_A X = 1_B, X >= 0
/// (both sides are strictly feasible, so the values coincide).
pub fn min_entropy(rho_ab: &DensityOperator) -> Result<f64> {
    Ok(min_entropy_detailed(rho_ab)?.hmin_bits)
}

pub fn min_entropy_detailed(rho_ab: &DensityOperator) -> Result<MinEntropyInfo> {
    if rho_ab.dims().len() != 2 {
        return Err(Error::Shape(format!(
            "need bipartite dims, got {:?}",
            rho_ab.dims()
        )));
    }
    let da = rho_ab.dims()[0];
    let db = rho_ab.dims()[1];
    let d = da * db;

    let imag_max = rho_ab
        .mat()
        .data()
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.im.abs()));

    // Real states stay in dimension d; complex ones go through the
    // symmetric embedding at dimension 2d (objective and constraint
    // values double there).
    let (problem, scale) = if imag_max <= 1e-13 {
        let mut obj = RealMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                obj.set(i, j, rho_ab.mat().get(i, j).re);
            }
        }
        let mut p = SdpProblem::new(Sense::Maximize, obj.symmetrize())?;
        for b in 0..db {
            for b2 in b..db {
                let mut e = RealMatrix::zeros(d, d);
                for a in 0..da {
                    let (r, c) = (a * db + b, a * db + b2);
                    e.set(r, c, e.get(r, c) + 1.0);
                    if r != c {
                        e.set(c, r, e.get(c, r) + 1.0);
                    }
                }
                p.add_constraint(e, if b == b2 { 1.0 } else { 0.0 })?;
            }
        }
        (p, 1.0)
    } else {
        let obj = embed_hermitian(rho_ab.mat());
        let mut p = SdpProblem::new(Sense::Maximize, obj.symmetrize())?;
        let one_a = ComplexMatrix::identity(da);
        for b in 0..db {
            for b2 in b..db {
                let mut g = ComplexMatrix::zeros(db, db);
                g.set(b, b2, Complex64::new(1.0, 0.0));
                g.set(b2, b, Complex64::new(1.0, 0.0));
                let f = crate::linalg::kron(&one_a, &g)?;
                p.add_constraint(embed_hermitian(&f), if b == b2 { 2.0 } else { 0.0 })?;
                if b != b2 {
                    let mut g = ComplexMatrix::zeros(db, db);
                    g.set(b, b2, Complex64::new(0.0, 1.0));
                    g.set(b2, b, Complex64::new(0.0, -1.0));
                    let f = crate::linalg::kron(&one_a, &g)?;
                    p.add_constraint(embed_hermitian(&f), 0.0)?;
                }
            }
        }
        (p, 2.0)
    };

    let sol = SdpSolver::new().solve(&problem)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Sdp(format!(
            "min-entropy SDP ended with status {:?} (gap {:.3e})",
            sol.status, sol.gap
        )));
    }
    let value = sol.primal_value / scale;
    if value <= 0.0 {
        return Err(Error::Sdp(format!("non-positive guessing value {value}")));
    }
    Ok(MinEntropyInfo {
        hmin_bits: 0.0 - value.log2(),
        sdp_value: value,
        sdp_gap: sol.gap / scale,
        iterations: sol.iterations,
    })
}

/// Conditional max-entropy through purification duality:
/// H_max(A|B) = -H_min(A|C) on a purification rho_ABC.
pub fn max_entropy(rho_ab: &DensityOperator) -> Result<f64> {
    if rho_ab.dims().len() != 2 {
        return Err(Error::Shape(format!(
            "need bipartite dims, got {:?}",
            rho_ab.dims()
        )));
    }
    let pure = purify(rho_ab)?;
    let rho_ac = pure.marginal(&[0, 2])?;
    Ok(-min_entropy(&rho_ac)?)
}

/// Relative max-entropy h_min(rho || sigma) = sup { lambda :
/// rho <= 2^{-lambda} sigma }, i.e.
/// -log2 || sigma^{-1/2} rho sigma^{-1/2} || on sigma's support.
pub fn h_min_rel(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() {
        return Err(Error::Shape("h_min_rel: dimension mismatch".into()));
    }
    psd_eig(rho, "h_min_rel: rho")?;
    if rho.trace_re() > 1.0 + 1e-12 {
        return Err(Error::Parameter(
            "h_min_rel: rho is not sub-normalized".into(),
        ));
    }
    let (svals, svecs) = psd_eig(sigma, "h_min_rel: sigma")?;
    let smax = svals.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = 1e-12 * smax.max(1.0);
    let n = sigma.rows();

    let mut inv_sqrt = ComplexMatrix::zeros(n, n);
    let mut kernel = ComplexMatrix::zeros(n, n);
    for (k, &l) in svals.iter().enumerate() {
        let col = svecs.column(k);
        let proj = ComplexMatrix::outer(&col, &col);
        if l > cutoff {
            inv_sqrt = inv_sqrt.add(&proj.scale_re(1.0 / l.sqrt()));
        } else {
            kernel = kernel.add(&proj);
        }
    }
    let outside = operator_norm(&kernel.mul(rho).mul(&kernel).hermitian_part())?;
    if outside > 1e-9 {
        return Err(Error::Support(format!(
            "rho has weight {outside:.3e} outside sigma's support"
        )));
    }
    let t = inv_sqrt.mul(rho).mul(&inv_sqrt).hermitian_part();
    let norm = operator_norm(&t)?;
    if norm <= 0.0 {
        return Err(Error::Parameter(
            "h_min_rel: rho vanishes on the support".into(),
        ));
    }
    Ok(-norm.log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One evaluated uncertainty-relation instance.
#[derive(Debug, Clone, Serialize)]
pub struct UcrReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub components: BTreeMap<String, f64>,
    pub overlap_used: f64,
    pub verdict: Verdict,
}

impl UcrReport {
    fn new(lhs: f64, rhs: f64, components: BTreeMap<String, f64>, overlap_used: f64) -> Self {
        let slack = lhs - rhs;
        let verdict = if slack >= -DEFAULT_PASS_TOL {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            lhs,
            rhs,
            slack,
            components,
            overlap_used,
            verdict,
        }
    }

    /// Recomputes the verdict with a caller-supplied slack tolerance.
    pub fn apply_tolerance(&mut self, tol: f64) {
        self.verdict = if self.slack >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
}

fn measured_sides(
    rho_abc: &DensityOperator,
    x: &BinaryPovm,
    y: &BinaryPovm,
) -> Result<(DensityOperator, DensityOperator)> {
    if rho_abc.dims().len() != 3 {
        return Err(Error::Shape(format!(
            "need tripartite dims (1 is fine for trivial parts), got {:?}",
            rho_abc.dims()
        )));
    }
    let rho_ab = rho_abc.marginal(&[0, 1])?;
    let rho_ac = rho_abc.marginal(&[0, 2])?;
    let rho_xb = measure_cq(&rho_ab, x, 0)?.joint()?;
    let rho_yc = measure_cq(&rho_ac, y, 0)?.joint()?;
    Ok((rho_xb, rho_yc))
}

fn check_overlap_arg(overlap_ub: f64) -> Result<()> {
    if !(overlap_ub > 0.0 && overlap_ub <= 1.0 + 1e-9) {
        return Err(Error::Parameter(format!(
            "overlap bound {overlap_ub} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Von Neumann uncertainty relation:
/// H(X|B) + H(Y|C) >= -log2(overlap upper bound).
///
/// Any upper bound on the effective overlap of `{rho_A, X, Y}` gives a
/// valid (possibly weaker) right-hand side.
pub fn check_ucr_vn(
    rho_abc: &DensityOperator,
    x: &BinaryPovm,
    y: &BinaryPovm,
    overlap_ub: f64,
) -> Result<UcrReport> {
    check_overlap_arg(overlap_ub)?;
    let (rho_xb, rho_yc) = measured_sides(rho_abc, x, y)?;
    let hxb = cond_von_neumann(&rho_xb)?;
    let hyc = cond_von_neumann(&rho_yc)?;
    let mut components = BTreeMap::new();
    components.insert("H(X|B)".to_string(), hxb);
    components.insert("H(Y|C)".to_string(), hyc);
    Ok(UcrReport::new(
        hxb + hyc,
        0.0 - overlap_ub.log2(),
        components,
        overlap_ub,
    ))
}

/// Min/max-entropy uncertainty relation at smoothing zero:
/// H_min(X|B) + H_max(Y|C) >= -log2(overlap) - log2(2/eps_bar^2).
///
/// The unsmoothed entropies lower-bound their smooth versions, so this
/// is the conservative side of the smooth statement.
pub fn check_ucr_minmax(
    rho_abc: &DensityOperator,
    x: &BinaryPovm,
    y: &BinaryPovm,
    overlap_ub: f64,
    eps_bar: f64,
) -> Result<UcrReport> {
    check_overlap_arg(overlap_ub)?;
    if !(eps_bar > 0.0 && eps_bar <= 1.0) {
        return Err(Error::Parameter(format!(
            "eps_bar {eps_bar} outside (0, 1]"
        )));
    }
    let (rho_xb, rho_yc) = measured_sides(rho_abc, x, y)?;
    let hmin = min_entropy(&rho_xb)?;
    let hmax = max_entropy(&rho_yc)?;
    let penalty = (2.0 / (eps_bar * eps_bar)).log2();
    let mut components = BTreeMap::new();
    components.insert("Hmin(X|B)".to_string(), hmin);
    components.insert("Hmax(Y|C)".to_string(), hmax);
    components.insert("penalty_bits".to_string(), penalty);
    Ok(UcrReport::new(
        hmin + hmax,
        0.0 - overlap_ub.log2() - penalty,
        components,
        overlap_ub,
    ))
}
