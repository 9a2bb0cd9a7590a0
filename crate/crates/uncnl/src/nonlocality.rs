//! CHSH machinery: the CHSH value of a bipartite setup, Gram-matrix
//! extraction, the converse Tsirelson realization through Clifford
//! generators, the beta_max(gamma*) family (closed form and SDP), and
//! the bounds tying the CHSH value to the effective overlap.

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{kron, psd_eig, vec_inner, ComplexMatrix};
use crate::quantum::{bb84_source_state, BinaryPovm, DensityOperator, Observable};
use crate::sdp::{RealMatrix, SdpProblem, SdpSolution, SdpSolver, Sense};
use crate::{Error, Result};

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// State shared between A and D plus two binary measurements per side.
#[derive(Debug, Clone)]
pub struct BipartiteSetup {
    pub state: DensityOperator,
    pub x: BinaryPovm,
    pub y: BinaryPovm,
    pub r: BinaryPovm,
    pub s: BinaryPovm,
}

impl BipartiteSetup {
    pub fn new(
        state: DensityOperator,
        x: BinaryPovm,
        y: BinaryPovm,
        r: BinaryPovm,
        s: BinaryPovm,
    ) -> Result<Self> {
        if state.dims().len() != 2 {
            return Err(Error::Shape(format!(
                "need dims [d_A, d_D], got {:?}",
                state.dims()
            )));
        }
        let (da, dd) = (state.dims()[0], state.dims()[1]);
        if x.dim() != da || y.dim() != da || r.dim() != dd || s.dim() != dd {
            return Err(Error::Shape(
                "measurement dimensions do not match the state".into(),
            ));
        }
        Ok(Self { state, x, y, r, s })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.state.dims()[0], self.state.dims()[1])
    }

    /// Maximally entangled pair with the measurement angles that reach
    /// Tsirelson's bound.
    pub fn optimal_qubit() -> Result<Self> {
        Self::werner(1.0)
    }

    /// Isotropic-noise variant: visibility 1 is the optimal setup,
    /// visibility 0 pure noise. The CHSH value scales linearly.
    pub fn werner(visibility: f64) -> Result<Self> {
        let state = bb84_source_state(visibility)?;
        let sz = ComplexMatrix::diag(&[1.0, -1.0]);
        let sx = ComplexMatrix::new(2, 2, vec![c64(0.), c64(1.), c64(1.), c64(0.)])?;
        let povm = |o: ComplexMatrix| -> Result<BinaryPovm> {
            BinaryPovm::from_observable(&Observable::new(o)?)
        };
        let inv = 1.0 / 2f64.sqrt();
        Ok(Self {
            state,
            x: povm(sz.clone())?,
            y: povm(sx.clone())?,
            r: povm(sz.add(&sx).scale_re(inv))?,
            s: povm(sz.sub(&sx).scale_re(inv))?,
        })
    }
}

/// CHSH value of a bipartite setup:
/// 2 tr( sum_i [ M_i (x) (R_i + S_i) + N_i (x) (R_i + S_{1-i}) ] rho ) - 4.
pub fn chsh_value(setup: &BipartiteSetup) -> Result<f64> {
    let mut agree = ComplexMatrix::zeros(setup.state.total_dim(), setup.state.total_dim());
    for i in 0..2 {
        let d_part = setup.r.element(i).add(setup.s.element(i));
        agree = agree.add(&kron(setup.x.element(i), &d_part)?);
        let d_part = setup.r.element(i).add(setup.s.element(1 - i));
        agree = agree.add(&kron(setup.y.element(i), &d_part)?);
    }
    Ok(2.0 * agree.mul(setup.state.mat()).trace_re() - 4.0)
}

/// CHSH value from the four agreement probabilities:
/// beta = 2 Pr[X=R] + 2 Pr[Y=R] + 2 Pr[X=S] + 2 Pr[Y!=S] - 4.
pub fn chsh_from_probs(p_xr: f64, p_yr: f64, p_xs: f64, p_ys_neq: f64) -> Result<f64> {
    for (name, p) in [
        ("Pr[X=R]", p_xr),
        ("Pr[Y=R]", p_yr),
        ("Pr[X=S]", p_xs),
        ("Pr[Y!=S]", p_ys_neq),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("{name} = {p} outside [0, 1]")));
        }
    }
    Ok(2.0 * (p_xr + p_yr + p_xs + p_ys_neq) - 4.0)
}

/// Real symmetric PSD correlation matrix with unit diagonal, split into
/// an A block of size n and a B block of size m.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: RealMatrix,
    n: usize,
    m: usize,
}

impl GramMatrix {
    pub fn new(entries: RealMatrix, n: usize, m: usize) -> Result<Self> {
        if entries.rows() != n + m || entries.cols() != n + m || n == 0 || m == 0 {
            return Err(Error::Shape(format!(
                "Gram matrix is {}x{} but partition is ({n}, {m})",
                entries.rows(),
                entries.cols()
            )));
        }
        if !entries.is_symmetric(1e-9) {
            return Err(Error::Parameter("Gram matrix is not symmetric".into()));
        }
        for i in 0..n + m {
            if (entries.get(i, i) - 1.0).abs() > 1e-9 {
                return Err(Error::Parameter(format!(
                    "diagonal entry {i} is {}, not 1",
                    entries.get(i, i)
                )));
            }
        }
        let min_eig = entries.symmetrize().min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(Error::NotPsd(format!(
                "Gram matrix eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { entries, n, m })
    }

    pub fn entries(&self) -> &RealMatrix {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn partition(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }
}

/// The CHSH weight: contracting with a Gram matrix in the order
/// (O_1, O_2, Q_1, Q_2) gives the correlator combination
/// E(O1,Q1) + E(O1,Q2) + E(O2,Q1) - E(O2,Q2).
pub fn chsh_weight() -> RealMatrix {
    RealMatrix::from_rows(&[
        &[0.0, 0.0, 0.5, 0.5],
        &[0.0, 0.0, 0.5, -0.5],
        &[0.5, 0.5, 0.0, 0.0],
        &[0.5, -0.5, 0.0, 0.0],
    ])
    .expect("fixed 4x4")
}

fn purification_vector(rho: &DensityOperator) -> Result<(Vec<Complex64>, usize)> {
    let (vals, vecs) = psd_eig(rho.mat(), "purification")?;
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = 1e-14 * lmax.max(1.0);
    let support: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cutoff).collect();
    let rank = support.len().max(1);
    let d = rho.total_dim();
    let mut psi = vec![Complex64::new(0.0, 0.0); d * rank];
    for (slot, &k) in support.iter().enumerate() {
        let amp = vals[k].sqrt();
        let col = vecs.column(k);
        for i in 0..d {
            psi[i * rank + slot] = col[i] * c64(amp);
        }
    }
    Ok((psi, rank))
}

/// Applies an operator to one tensor factor of a state vector.
fn apply_op_vec(
    op: &ComplexMatrix,
    psi: &[Complex64],
    dims: &[usize],
    target: usize,
) -> Vec<Complex64> {
    let d_t = dims[target];
    let after: usize = dims[target + 1..].iter().product();
    let before: usize = dims[..target].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for b in 0..before {
        for t_out in 0..d_t {
            for a in 0..after {
                let mut acc = Complex64::new(0.0, 0.0);
                for t_in in 0..d_t {
                    acc += op.get(t_out, t_in) * psi[(b * d_t + t_in) * after + a];
                }
                out[(b * d_t + t_out) * after + a] = acc;
            }
        }
    }
    out
}

/// Gram matrix of a bipartite setup: cross entries are the correlations
/// tr((O_i (x) Q_j) rho), diagonal blocks are 2 gamma* - 1.
pub fn gram_from_setup(
    state: &DensityOperator,
    obs_a: &[Observable],
    obs_b: &[Observable],
) -> Result<GramMatrix> {
    if state.dims().len() != 2 {
        return Err(Error::Shape(format!(
            "need dims [d_A, d_B], got {:?}",
            state.dims()
        )));
    }
    let (da, db) = (state.dims()[0], state.dims()[1]);
    for o in obs_a {
        if o.dim() != da {
            return Err(Error::Shape("A-side observable dimension mismatch".into()));
        }
        o.check_binary_spectrum("gram_from_setup")?;
    }
    for q in obs_b {
        if q.dim() != db {
            return Err(Error::Shape("B-side observable dimension mismatch".into()));
        }
        q.check_binary_spectrum("gram_from_setup")?;
    }
    let (n, m) = (obs_a.len(), obs_b.len());
    let (psi, rank) = purification_vector(state)?;
    let dims = [da, db, rank];

    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n + m);
    for o in obs_a {
        vectors.push(apply_op_vec(o.mat(), &psi, &dims, 0));
    }
    for q in obs_b {
        vectors.push(apply_op_vec(q.mat(), &psi, &dims, 1));
    }
    // G = (Gbar + Gbar^T)/2 with Gbar the complex Gramian; for
    // Hermitian conjugation pairs this is just the real part.
    let mut g = RealMatrix::zeros(n + m, n + m);
    for i in 0..n + m {
        for j in 0..n + m {
            g.set(i, j, vec_inner(&vectors[i], &vectors[j]).re);
        }
    }
    GramMatrix::new(g.symmetrize(), n, m)
}

/// Anticommuting Hermitian generators squaring to one, as Pauli strings
/// on ceil(d/2) qubits.
pub fn clifford_generators(d: usize) -> Result<Vec<ComplexMatrix>> {
    if d == 0 {
        return Err(Error::Parameter("need at least one generator".into()));
    }
    if d > 12 {
        return Err(Error::Size(format!(
            "{d} generators exceed the supported 12"
        )));
    }
    let sx = ComplexMatrix::new(2, 2, vec![c64(0.), c64(1.), c64(1.), c64(0.)])?;
    let sy = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::new(0., 0.),
            Complex64::new(0., -1.),
            Complex64::new(0., 1.),
            Complex64::new(0., 0.),
        ],
    )?;
    let sz = ComplexMatrix::diag(&[1.0, -1.0]);
    let qubits = d.div_ceil(2);
    let mut out = Vec::with_capacity(d);
    for ell in 0..d {
        let site = ell / 2;
        let local = if ell % 2 == 0 { &sx } else { &sy };
        let mut gamma = ComplexMatrix::identity(1);
        for q in 0..qubits {
            let factor = if q < site {
                &sz
            } else if q == site {
                local
            } else {
                // identity tail
                &ComplexMatrix::identity(2)
            };
            gamma = kron(&gamma, factor)?;
        }
        out.push(gamma);
    }
    Ok(out)
}

/// Converse Tsirelson realization: observables
/// O_i = sum_l (x_i)_l Gamma_l^T on A and Q_j = sum_l (x_{n+j})_l Gamma_l
/// on B, measured on the maximally entangled state, reproduce every
/// entry of the Gram matrix.
pub fn realize_from_gram(
    g: &GramMatrix,
) -> Result<(DensityOperator, Vec<Observable>, Vec<Observable>)> {
    let d = g.size();
    let (n, m) = g.partition();
    let (vals, vecs) = g.entries().sym_eig();
    if vals[0] < -1e-9 {
        return Err(Error::NotPsd(format!(
            "Gram factorization: eigenvalue {:.3e}",
            vals[0]
        )));
    }
    // Columns of sqrt(Lambda) V^T are the Tsirelson vectors.
    let xvec = |i: usize| -> Vec<f64> {
        (0..d)
            .map(|l| vals[l].max(0.0).sqrt() * vecs.get(i, l))
            .collect()
    };
    let gammas = clifford_generators(d)?;
    let rep_dim = gammas[0].rows();

    let build = |coeffs: &[f64], transpose: bool| -> Result<Observable> {
        let mut o = ComplexMatrix::zeros(rep_dim, rep_dim);
        for (l, &cl) in coeffs.iter().enumerate() {
            if cl == 0.0 {
                continue;
            }
            let term = if transpose {
                gammas[l].transpose()
            } else {
                gammas[l].clone()
            };
            o = o.add(&term.scale_re(cl));
        }
        Observable::new(o.hermitian_part())
    };
    let obs_a: Vec<Observable> = (0..n)
        .map(|i| build(&xvec(i), true))
        .collect::<Result<_>>()?;
    let obs_b: Vec<Observable> = (0..m)
        .map(|j| build(&xvec(n + j), false))
        .collect::<Result<_>>()?;

    let amp = 1.0 / (rep_dim as f64).sqrt();
    let mut psi = vec![Complex64::new(0.0, 0.0); rep_dim * rep_dim];
    for k in 0..rep_dim {
        psi[k * rep_dim + k] = c64(amp);
    }
    let state = DensityOperator::from_state_vector(&psi, vec![rep_dim, rep_dim])?;
    Ok((state, obs_a, obs_b))
}

/// beta_max(gamma*) = 2 (sqrt(gamma*) + sqrt(1 - gamma*)).
pub fn beta_max_analytic(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 1]")));
    }
    Ok(2.0 * (gamma.sqrt() + (1.0 - gamma).sqrt()))
}

/// The constrained-correlation SDP behind beta_max(gamma*):
/// maximize tr(W G) over PSD G with unit diagonal and
/// G_12 = G_21 = 2 gamma* - 1.
pub fn beta_max_problem(gamma: f64) -> Result<SdpProblem> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let mut p = SdpProblem::new(Sense::Maximize, chsh_weight())?;
    for i in 0..4 {
        let mut e = RealMatrix::zeros(4, 4);
        e.set(i, i, 1.0);
        p.add_constraint(e, 1.0)?;
    }
    let mut e = RealMatrix::zeros(4, 4);
    e.set(0, 1, 1.0);
    e.set(1, 0, 1.0);
    p.add_constraint(e, 2.0 * (2.0 * gamma - 1.0))?;
    Ok(p)
}

pub fn beta_max_sdp(gamma: f64) -> Result<SdpSolution> {
    SdpSolver::new().solve(&beta_max_problem(gamma)?)
}

/// Closed-form optimal primal point of [`beta_max_problem`]: feasible
/// for every gamma in [0, 1] and attaining 2(sqrt(g) + sqrt(1-g)).
pub fn beta_max_primal_certificate(gamma: f64) -> Result<RealMatrix> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let (rg, rr) = (gamma.sqrt(), (1.0 - gamma).sqrt());
    let t = 2.0 * gamma - 1.0;
    RealMatrix::from_rows(&[
        &[1.0, t, rg, rr],
        &[t, 1.0, rg, -rr],
        &[rg, rg, 1.0, 0.0],
        &[rr, -rr, 0.0, 1.0],
    ])
}

/// Closed-form optimal dual multipliers of [`beta_max_problem`] (the
/// four diagonal entries followed by the pinned-pair multiplier).
/// Finite only for gamma strictly inside (0, 1).
pub fn beta_max_dual_certificate(gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Parameter(format!("gamma {gamma} outside (0, 1)")));
    }
    let (ig, ir) = (1.0 / gamma.sqrt(), 1.0 / (1.0 - gamma).sqrt());
    let a = 0.25 * (ig + ir);
    let b = 0.25 * (ig - ir);
    Ok(vec![a, a, gamma.sqrt(), (1.0 - gamma).sqrt(), b])
}

/// Largest CHSH value compatible with an effective overlap:
/// beta <= 2 (sqrt(c*) + sqrt(1 - c*)).
pub fn beta_bound_from_overlap(cstar: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cstar) {
        return Err(Error::Parameter(format!("overlap {cstar} outside [0, 1]")));
    }
    Ok(2.0 * (cstar.sqrt() + (1.0 - cstar).sqrt()))
}

/// Largest effective overlap compatible with a CHSH value:
/// c* <= 1/2 + (beta/8) sqrt(8 - beta^2) for beta in [2, 2 sqrt(2)].
///
/// Below the classical value the constraint is vacuous and the bound is
/// 1; negative beta maps through |beta| (output-flip symmetry of the
/// game).
pub fn overlap_bound_from_beta(beta: f64) -> Result<f64> {
    let b = beta.abs();
    if b > TSIRELSON + 1e-9 {
        return Err(Error::Parameter(format!(
            "|beta| = {b} exceeds the quantum maximum"
        )));
    }
    if b <= 2.0 {
        return Ok(1.0);
    }
    Ok(0.5 + b / 8.0 * (8.0 - b * b).max(0.0).sqrt())
}

/// Guaranteed uncertainty in bits as a function of the CHSH value:
/// q = -log2 of the overlap bound.
pub fn di_uncertainty_bound(beta: f64) -> Result<f64> {
    // The leading 0.0 turns -0.0 (vacuous bound) into a clean zero.
    Ok(0.0 - overlap_bound_from_beta(beta)?.log2())
}

/// One row of the overlap/uncertainty-versus-CHSH curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub beta: f64,
    pub cstar_bound: f64,
    pub q_bits: f64,
}

/// Curve samples on beta in [2, 2 sqrt(2)] with exact endpoints; the
/// overlap bound decreases and the guaranteed uncertainty increases.
pub fn tradeoff_curve(samples: usize) -> Result<Vec<CurvePoint>> {
    if samples < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let lo = 2.0_f64;
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let beta = if i + 1 == samples {
            TSIRELSON
        } else {
            lo + (TSIRELSON - lo) * i as f64 / (samples - 1) as f64
        };
        let cstar_bound = overlap_bound_from_beta(beta)?;
        out.push(CurvePoint {
            beta,
            cstar_bound,
            q_bits: 0.0 - cstar_bound.log2(),
        });
    }
    Ok(out)
}
