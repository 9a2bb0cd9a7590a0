//! Small dense semidefinite-program solver.
//!
//! Solves `max/min tr(B G)` subject to `tr(E_i G) = e_i` and `G >= 0`
//! with a primal-dual interior point method: Nesterov-Todd scaling,
//! Mehrotra predictor-corrector, dense Cholesky of the Schur
//! complement. Matrices are real symmetric; callers with complex
//! Hermitian data use the standard 2x2 real embedding.
//!
//! The solver is deterministic: identical problems produce identical
//! iterates.

use serde::Serialize;

use crate::linalg::jacobi_real_sym;
use crate::{Error, Result};

/// Hard cap on the PSD block dimension (the public contract is 64;
/// the factor 2 leaves room for real embeddings of complex data).
const MAX_DIM: usize = 128;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("matrix entry is not finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, f: f64) -> Self {
        let data = self.data.iter().map(|a| a * f).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += aik * o.data[k * o.cols + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn symmetrize(&self) -> Self {
        self.add(&self.transpose()).scale(0.5)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product `<A, B> = sum_ij A_ij B_ij`.
    pub fn dot(&self, o: &Self) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = 1.0 + self.max_abs();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
    /// eigenvectors as columns.
    pub fn sym_eig(&self) -> (Vec<f64>, RealMatrix) {
        let (vals, vecs) = jacobi_real_sym(self.rows, &self.data);
        (
            vals,
            RealMatrix {
                rows: self.rows,
                cols: self.rows,
                data: vecs,
            },
        )
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.sym_eig().0[0]
    }

    /// Lower-triangular Cholesky factor; `None` if not positive definite.
    pub fn cholesky(&self) -> Option<RealMatrix> {
        let n = self.rows;
        let mut l = RealMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    /// Solves L x = b for lower-triangular L.
    fn forward_sub(&self, b: &[f64]) -> Vec<f64> {
        let n = self.rows;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.get(i, k) * x[k];
            }
            x[i] /= self.get(i, i);
        }
        x
    }

    /// Solves L^T x = b for lower-triangular L.
    fn back_sub(&self, b: &[f64]) -> Vec<f64> {
        let n = self.rows;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.get(k, i) * x[k];
            }
            x[i] /= self.get(i, i);
        }
        x
    }

    /// Inverse of a lower-triangular matrix by forward substitution.
    fn lower_tri_inverse(&self) -> RealMatrix {
        let n = self.rows;
        let mut inv = RealMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let x = self.forward_sub(&e);
            for i in 0..n {
                inv.set(i, j, x[i]);
            }
            e[j] = 0.0;
        }
        inv
    }
}

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Linear-objective SDP over one PSD block with equality constraints.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    sense: Sense,
    objective: RealMatrix,
    constraints: Vec<(RealMatrix, f64)>,
}

impl SdpProblem {
    pub fn new(sense: Sense, objective: RealMatrix) -> Result<Self> {
        if objective.rows() != objective.cols() {
            return Err(Error::Shape("objective must be square".into()));
        }
        if objective.rows() > MAX_DIM {
            return Err(Error::Size(format!(
                "block dimension {} exceeds {}",
                objective.rows(),
                MAX_DIM
            )));
        }
        if !objective.is_symmetric(1e-12) {
            return Err(Error::Parameter("objective is not symmetric".into()));
        }
        Ok(Self {
            sense,
            objective,
            constraints: Vec::new(),
        })
    }

    pub fn add_constraint(&mut self, e: RealMatrix, value: f64) -> Result<()> {
        if e.rows() != self.block_dim() || e.cols() != self.block_dim() {
            return Err(Error::Shape("constraint dimension mismatch".into()));
        }
        if !e.is_symmetric(1e-12) {
            return Err(Error::Parameter(
                "constraint matrix is not symmetric".into(),
            ));
        }
        if !value.is_finite() {
            return Err(Error::Parameter("constraint value is not finite".into()));
        }
        self.constraints.push((e, value));
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &RealMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[(RealMatrix, f64)] {
        &self.constraints
    }

    pub fn block_dim(&self) -> usize {
        self.objective.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Primal/dual pair returned by [`SdpSolver::solve`].
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal: RealMatrix,
    pub dual: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    /// Wraps an externally supplied certificate pair so it can be fed
    /// to [`verify_certificate`].
    pub fn from_parts(problem: &SdpProblem, primal: RealMatrix, dual: Vec<f64>) -> Result<Self> {
        if primal.rows() != problem.block_dim() || dual.len() != problem.constraints().len() {
            return Err(Error::Shape(
                "certificate dimensions do not match problem".into(),
            ));
        }
        let primal_value = problem.objective().dot(&primal);
        let dual_value: f64 = dual
            .iter()
            .zip(problem.constraints())
            .map(|(y, (_, e))| y * e)
            .sum();
        Ok(Self {
            gap: (primal_value - dual_value).abs(),
            primal,
            dual,
            primal_value,
            dual_value,
            status: SdpStatus::Optimal,
            iterations: 0,
        })
    }
}

/// Interior-point solver; one solve per instance at a time.
#[derive(Debug, Clone)]
pub struct SdpSolver {
    pub max_iter: usize,
    pub feas_tol: f64,
    pub gap_tol: f64,
}

impl Default for SdpSolver {
    fn default() -> Self {
        Self {
            max_iter: 200,
            feas_tol: 1e-10,
            gap_tol: 1e-10,
        }
    }
}

/// Largest step in [0, cap] keeping `x + alpha dx` positive definite.
fn max_step(x: &RealMatrix, dx: &RealMatrix, cap: f64) -> f64 {
    let pd = |alpha: f64| x.add(&dx.scale(alpha)).cholesky().is_some();
    if pd(cap) {
        return cap;
    }
    let (mut lo, mut hi) = (0.0_f64, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// W = L (L^T Z L)^{-1/2} L^T with X = L L^T, the unique SPD scaling
/// point with W Z W = X.
fn nt_scaling(x: &RealMatrix, z: &RealMatrix) -> Option<RealMatrix> {
    let l = x.cholesky()?;
    let k = l.transpose().mul(z).mul(&l).symmetrize();
    let (vals, vecs) = k.sym_eig();
    if vals[0] <= 0.0 {
        return None;
    }
    let n = x.rows();
    let mut inv_sqrt = RealMatrix::zeros(n, n);
    for a in 0..n {
        let f = 1.0 / vals[a].sqrt();
        for i in 0..n {
            for j in 0..n {
                let add = vecs.get(i, a) * f * vecs.get(j, a);
                inv_sqrt.set(i, j, inv_sqrt.get(i, j) + add);
            }
        }
    }
    Some(l.mul(&inv_sqrt).mul(&l.transpose()).symmetrize())
}

/// Orthonormalized constraint system. Each `q[j]` has unit Frobenius
/// norm, `beta[j]` is the matching right-hand side and `coeff[j]` its
/// expansion over the original constraint list (so duals map back).
struct PrunedConstraints {
    q: Vec<RealMatrix>,
    beta: Vec<f64>,
    coeff: Vec<Vec<f64>>,
}

/// Modified Gram-Schmidt over constraint matrices. Dependent rows are
/// dropped when consistent; inconsistent dependencies mean the affine
/// system itself is infeasible.
fn prune_constraints(
    a: &[RealMatrix],
    b: &[f64],
    consistency_tol: f64,
) -> Option<PrunedConstraints> {
    let m = a.len();
    let mut out = PrunedConstraints {
        q: Vec::new(),
        beta: Vec::new(),
        coeff: Vec::new(),
    };
    for i in 0..m {
        let mut r = a[i].clone();
        let mut bb = b[i];
        let mut co = vec![0.0; m];
        co[i] = 1.0;
        for j in 0..out.q.len() {
            let c = out.q[j].dot(&r);
            r = r.sub(&out.q[j].scale(c));
            bb -= c * out.beta[j];
            for (ck, qk) in co.iter_mut().zip(&out.coeff[j]) {
                *ck -= c * qk;
            }
        }
        let nrm = r.frobenius_norm();
        if nrm > 1e-12 * (1.0 + a[i].frobenius_norm()) {
            out.q.push(r.scale(1.0 / nrm));
            out.beta.push(bb / nrm);
            out.coeff.push(co.iter().map(|x| x / nrm).collect());
        } else if bb.abs() > consistency_tol * (1.0 + b[i].abs()) {
            return None; // dependent constraint with contradictory value
        }
    }
    Some(out)
}

/// Null directions forced by the constraints alone: entries of X that
/// are pinned by single-entry constraints and close a singular 2x2
/// principal minor force the minor's kernel out of every feasible X.
/// Exactness matters: the objective can move like sqrt(eps) under a
/// face perturbation of eps, so faces from stalled iterates are not
/// accurate enough.
fn pinned_minor_nulls(a: &[RealMatrix], b: &[f64], n: usize) -> Vec<Vec<f64>> {
    use std::collections::BTreeMap;
    // Ordered map: the face basis must not depend on hash order, or
    // identical problems could produce different iterates.
    let mut pinned: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (e, v) in a.iter().zip(b) {
        let mut support: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for j in i..n {
                if e.get(i, j) != 0.0 {
                    support.push((i, j));
                    if support.len() > 1 {
                        break;
                    }
                }
            }
            if support.len() > 1 {
                break;
            }
        }
        if support.len() != 1 {
            continue;
        }
        let (i, j) = support[0];
        let w = e.get(i, j);
        let value = if i == j { v / w } else { v / (2.0 * w) };
        pinned.entry((i, j)).or_insert(value);
    }

    let mut nulls: Vec<Vec<f64>> = Vec::new();
    let mut push_null = |vec: Vec<f64>| {
        // Orthogonalize against already collected directions.
        let mut r = vec;
        for q in &nulls {
            let c: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        let nrm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            for ri in r.iter_mut() {
                *ri /= nrm;
            }
            nulls.push(r);
        }
    };

    let diag: Vec<Option<f64>> = (0..n).map(|i| pinned.get(&(i, i)).copied()).collect();
    for i in 0..n {
        if let Some(p) = diag[i] {
            if p.abs() <= 1e-14 {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                push_null(e);
            }
        }
    }
    for (&(i, j), &r) in pinned.iter() {
        if i == j {
            continue;
        }
        let (p, q) = match (diag[i], diag[j]) {
            (Some(p), Some(q)) => (p, q),
            _ => continue,
        };
        let det = p * q - r * r;
        let scale = (p * q).abs().max(r * r).max(1e-300);
        if det.abs() <= 1e-12 * scale && p + q > 1e-14 {
            let (vi, vj) = if p >= q { (r, -p) } else { (q, -r) };
            let nrm = (vi * vi + vj * vj).sqrt();
            if nrm > 1e-14 {
                let mut e = vec![0.0; n];
                e[i] = vi / nrm;
                e[j] = vj / nrm;
                push_null(e);
            }
        }
    }
    nulls
}

/// Orthonormal basis of the complement of the given orthonormal set.
fn complement_basis(nulls: &[Vec<f64>], n: usize) -> RealMatrix {
    let mut proj = RealMatrix::zeros(n, n);
    for v in nulls {
        for i in 0..n {
            for j in 0..n {
                proj.set(i, j, proj.get(i, j) + v[i] * v[j]);
            }
        }
    }
    let (vals, vecs) = proj.sym_eig();
    let keep: Vec<usize> = (0..n).filter(|&k| vals[k] < 0.5).collect();
    let mut out = RealMatrix::zeros(n, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        for i in 0..n {
            out.set(i, col, vecs.get(i, k));
        }
    }
    out
}

struct IpmOut {
    x: RealMatrix,
    x_last: RealMatrix,
    y: Vec<f64>,
    iterations: usize,
    converged: bool,
    diverged: bool,
    merit: f64,
}

impl SdpSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interior-point loop on `min <c, X>` with orthonormal constraints
    /// `<q_j, X> = beta_j`. Returns the best iterate by a combined
    /// feasibility/gap merit.
    fn ipm(&self, c: &RealMatrix, q: &[RealMatrix], beta: &[f64]) -> IpmOut {
        let n = c.rows();
        let m = q.len();

        // Identity start scaled to fit the trace constraints in least squares.
        let num: f64 = q.iter().zip(beta).map(|(e, v)| v * e.trace()).sum();
        let den: f64 = q.iter().map(|e| e.trace() * e.trace()).sum();
        let tau = if den > 0.0 {
            (num / den).abs().clamp(0.1, 100.0)
        } else {
            1.0
        };
        let mut x = RealMatrix::identity(n).scale(tau);
        let mut z = RealMatrix::identity(n).scale(1.0 + c.max_abs());
        let mut y = vec![0.0_f64; m];

        let b_scale = 1.0 + beta.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        let c_scale = 1.0 + c.max_abs();

        let trace = std::env::var_os("UNCNL_IPM_TRACE").is_some();
        let mut best: Option<IpmOut> = None;
        let mut stall = 0usize;
        for iter in 0..self.max_iter {
            let mu = x.dot(&z) / n as f64;

            let rp: Vec<f64> = q.iter().zip(beta).map(|(e, v)| v - e.dot(&x)).collect();
            let mut rd = c.sub(&z);
            for (yi, e) in y.iter().zip(q) {
                rd = rd.sub(&e.scale(*yi));
            }
            let rp_norm = rp.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            let rd_norm = rd.max_abs();
            let pval = c.dot(&x);
            let dval: f64 = y.iter().zip(beta).map(|(yi, bi)| yi * bi).sum();
            let gap = (pval - dval).abs();
            let merit =
                rp_norm / b_scale + rd_norm / c_scale + gap / (1.0 + pval.abs() + dval.abs());
            let converged = rp_norm <= self.feas_tol * b_scale
                && rd_norm <= self.feas_tol * c_scale
                && gap <= self.gap_tol * (1.0 + pval.abs() + dval.abs());
            if trace {
                eprintln!(
                    "ipm n={n} it {iter}: mu={mu:.3e} rp={rp_norm:.3e} rd={rd_norm:.3e} gap={gap:.3e}"
                );
            }
            let diverged = x.frobenius_norm() > 1e10 || y.iter().any(|v| v.abs() > 1e12);

            if best.as_ref().is_none_or(|b| merit < b.merit) || converged {
                best = Some(IpmOut {
                    x: x.symmetrize(),
                    x_last: RealMatrix::zeros(0, 0),
                    y: y.clone(),
                    iterations: iter,
                    converged,
                    diverged,
                    merit,
                });
                stall = 0;
            } else {
                stall += 1;
            }
            if converged || diverged || stall > 12 {
                break;
            }

            let w = match nt_scaling(&x, &z) {
                Some(w) => w,
                None => break,
            };
            // Factor W = G G^T and diagonalize the scaled point
            // lambda = G^{-1} X G^{-T} = G^T Z G; the corrector is a
            // Lyapunov solve in lambda's eigenbasis.
            let g = match w.cholesky() {
                Some(g) => g,
                None => break,
            };
            let g_inv = g.lower_tri_inverse();
            let gt = g.transpose();
            let g_inv_t = g_inv.transpose();
            let lam = g_inv
                .mul(&x)
                .mul(&g_inv_t)
                .add(&gt.mul(&z).mul(&g))
                .scale(0.5)
                .symmetrize();
            let (d_lam, u_lam) = lam.sym_eig();
            if d_lam[0] <= 0.0 {
                break;
            }
            let u_t = u_lam.transpose();

            // Schur complement M_ij = <Q_i, W Q_j W>; one factorization
            // serves both the predictor and the corrector.
            let waw: Vec<RealMatrix> = q.iter().map(|e| w.mul(e).mul(&w)).collect();
            let mut schur = RealMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    schur.set(i, j, q[i].dot(&waw[j]));
                }
            }
            schur = schur.symmetrize();
            let reg = 1e-13 * (1.0 + schur.max_abs());
            for i in 0..m {
                schur.set(i, i, schur.get(i, i) + reg);
            }
            let schur_l = match schur.cholesky() {
                Some(l) => l,
                None => break,
            };

            let wrdw = w.mul(&rd).mul(&w).symmetrize();
            let solve_dir = |rc: &RealMatrix| {
                let rhs: Vec<f64> = (0..m)
                    .map(|i| rp[i] - q[i].dot(rc) + q[i].dot(&wrdw))
                    .collect();
                let mut dy = schur_l.back_sub(&schur_l.forward_sub(&rhs));
                // One round of iterative refinement keeps the primal
                // residual from drifting once the Schur system turns
                // ill-conditioned near the optimum.
                let mut resid = rhs.clone();
                for i in 0..m {
                    for (j, dyj) in dy.iter().enumerate() {
                        resid[i] -= schur.get(i, j) * dyj;
                    }
                }
                let corr = schur_l.back_sub(&schur_l.forward_sub(&resid));
                for (dyi, ci) in dy.iter_mut().zip(&corr) {
                    *dyi += ci;
                }
                let mut dz = rd.clone();
                for (dyi, e) in dy.iter().zip(q) {
                    dz = dz.sub(&e.scale(*dyi));
                }
                let dx = rc.sub(&w.mul(&dz).mul(&w)).symmetrize();
                (dx, dy, dz)
            };

            // Predictor (affine scaling direction).
            let rc_aff = x.scale(-1.0);
            let (dx_aff, _dy_aff, dz_aff) = solve_dir(&rc_aff);
            let ap_aff = max_step(&x, &dx_aff, 1.0);
            let ad_aff = max_step(&z, &dz_aff, 1.0);
            let mu_aff = x
                .add(&dx_aff.scale(ap_aff))
                .dot(&z.add(&dz_aff.scale(ad_aff)))
                .max(0.0)
                / n as f64;
            let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

            // Mehrotra corrector, assembled in the scaled eigenbasis:
            // H(lam ds) = sigma mu I - lam^2 - H(dxs dzs) with lam
            // diagonal there, so the Lyapunov solve is elementwise.
            let dxs = u_t.mul(&g_inv.mul(&dx_aff).mul(&g_inv_t)).mul(&u_lam);
            let dzs = u_t.mul(&gt.mul(&dz_aff).mul(&g)).mul(&u_lam);
            let cross = dxs.mul(&dzs).add(&dzs.mul(&dxs)).scale(0.5);
            let mut v = RealMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let rhs = if i == j {
                        sigma * mu - d_lam[i] * d_lam[i]
                    } else {
                        0.0
                    } - cross.get(i, j);
                    v.set(i, j, 2.0 * rhs / (d_lam[i] + d_lam[j]));
                }
            }
            let v = v.symmetrize();
            let rc = g.mul(&u_lam.mul(&v).mul(&u_t)).mul(&gt).symmetrize();
            let (dx, dy, dz) = solve_dir(&rc);

            let eta = 0.98;
            let ap = (eta * max_step(&x, &dx, 1.0 / eta)).min(1.0);
            let ad = (eta * max_step(&z, &dz, 1.0 / eta)).min(1.0);
            if ap < 1e-10 && ad < 1e-10 {
                break;
            }

            x = x.add(&dx.scale(ap)).symmetrize();
            z = z.add(&dz.scale(ad)).symmetrize();
            for (yi, dyi) in y.iter_mut().zip(&dy) {
                *yi += ad * dyi;
            }
        }

        let mut out = best.unwrap_or(IpmOut {
            x: x.clone(),
            x_last: RealMatrix::zeros(0, 0),
            y,
            iterations: 0,
            converged: false,
            diverged: false,
            merit: f64::INFINITY,
        });
        out.x_last = x;
        out
    }

    /// Minimization driver with constraint pruning and, when strict
    /// feasibility is lost (as it is at the boundary of the
    /// constrained-correlation family), one round of facial reduction:
    /// re-solve on the forced face (known exactly from pinned singular
    /// minors, or estimated from the stalled iterate) and lift back.
    /// Returns `(x, y_user, converged, diverged, iters)`.
    fn solve_min(
        &self,
        c: &RealMatrix,
        a: &[RealMatrix],
        b: &[f64],
        depth: usize,
    ) -> Option<(RealMatrix, Vec<f64>, bool, bool, usize)> {
        // Faces detected numerically carry O(stall) error, so reduced
        // systems get a looser consistency bound; the lift residual
        // guard below still validates the end result.
        let consistency_tol = if depth == 0 { 1e-9 } else { 1e-5 };
        let pruned = prune_constraints(a, b, consistency_tol)?;
        let out = self.ipm(c, &pruned.q, &pruned.beta);
        let map_dual = |y_int: &[f64]| -> Vec<f64> {
            let mut y_user = vec![0.0; a.len()];
            for (yj, co) in y_int.iter().zip(&pruned.coeff) {
                for (u, ck) in y_user.iter_mut().zip(co) {
                    *u += yj * ck;
                }
            }
            y_user
        };

        if out.converged || out.diverged || depth > 0 {
            let y = map_dual(&out.y);
            return Some((out.x, y, out.converged, out.diverged, out.iterations));
        }

        // Facial reduction attempt: constraint-pinned singular minors
        // give the face exactly; the last (most boundary-hugging)
        // iterate is the fallback source.
        let n = c.rows();
        let exact_nulls = pinned_minor_nulls(a, b, n);
        let v = if !exact_nulls.is_empty() && exact_nulls.len() < n {
            complement_basis(&exact_nulls, n)
        } else {
            let (vals, vecs) = out.x_last.sym_eig();
            let lmax = vals.iter().fold(0.0_f64, |m, &v| m.max(v.abs())).max(1e-12);
            let range: Vec<usize> = (0..n).filter(|&k| vals[k] > 1e-5 * lmax).collect();
            if range.is_empty() || range.len() == n {
                let y = map_dual(&out.y);
                return Some((out.x, y, false, false, out.iterations));
            }
            let mut m = RealMatrix::zeros(n, range.len());
            for (col, &idx) in range.iter().enumerate() {
                for i in 0..n {
                    m.set(i, col, vecs.get(i, idx));
                }
            }
            m
        };
        let vt = v.transpose();
        let c_red = vt.mul(c).mul(&v).symmetrize();
        let a_red: Vec<RealMatrix> = pruned
            .q
            .iter()
            .map(|e| vt.mul(e).mul(&v).symmetrize())
            .collect();
        let reduced = self.solve_min(&c_red, &a_red, &pruned.beta, depth + 1);

        if let Some((x_red, _, true, false, iters_red)) = reduced {
            let x_lift = v.mul(&x_red).mul(&vt).symmetrize();
            let b_scale = 1.0 + b.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
            let resid = a
                .iter()
                .zip(b)
                .map(|(e, v)| (e.dot(&x_lift) - v).abs())
                .fold(0.0_f64, f64::max);
            let jump = (c.dot(&x_lift) - c.dot(&out.x)).abs();
            let dval: f64 = map_dual(&out.y).iter().zip(b).map(|(yi, bi)| yi * bi).sum();
            let slack = 100.0 * ((c.dot(&out.x) - dval).abs() + 1e-6);
            if resid <= 1e-8 * b_scale && jump <= slack {
                // Keep the first solve's dual: it is feasible for the
                // original problem; the reduced dual is not.
                let y = map_dual(&out.y);
                return Some((x_lift, y, true, false, out.iterations + iters_red));
            }
        }

        let y = map_dual(&out.y);
        Some((out.x, y, false, false, out.iterations))
    }

    /// Solves the problem. Infeasibility is reported through
    /// `SdpStatus` (with NaN objective values when the affine system
    /// itself is contradictory), not as an `Err`; errors are reserved
    /// for malformed inputs.
    pub fn solve(&self, problem: &SdpProblem) -> Result<SdpSolution> {
        let n = problem.block_dim();
        if n == 0 {
            return Err(Error::Shape("empty problem".into()));
        }
        // Internally always minimize.
        let flip = problem.sense() == Sense::Maximize;
        let c = if flip {
            problem.objective().scale(-1.0)
        } else {
            problem.objective().clone()
        };
        let a: Vec<RealMatrix> = problem
            .constraints()
            .iter()
            .map(|(e, _)| e.clone())
            .collect();
        let b: Vec<f64> = problem.constraints().iter().map(|(_, v)| *v).collect();

        let solved = self.solve_min(&c, &a, &b, 0);
        let (x, y_min, converged, diverged, iterations) = match solved {
            Some(t) => t,
            None => {
                // Contradictory affine constraints.
                return Ok(SdpSolution {
                    primal: RealMatrix::identity(n),
                    dual: vec![0.0; a.len()],
                    primal_value: f64::NAN,
                    dual_value: f64::NAN,
                    gap: f64::NAN,
                    status: SdpStatus::Infeasible,
                    iterations: 0,
                });
            }
        };

        let pval_min = c.dot(&x);
        let dval_min: f64 = y_min.iter().zip(&b).map(|(yi, bi)| yi * bi).sum();
        let dual_ok = {
            let mut slack = c.scale(-1.0);
            for (yi, e) in y_min.iter().zip(&a) {
                slack = slack.add(&e.scale(*yi));
            }
            // slack = A*(y) - c for the internal min problem; dual
            // feasibility is c - A*(y) >= 0.
            slack.scale(-1.0).symmetrize().min_eigenvalue() >= -1e-8 * (1.0 + c.max_abs())
        };
        let (primal_value, dual_value, dual) = if flip {
            (-pval_min, -dval_min, y_min.iter().map(|v| -v).collect())
        } else {
            (pval_min, dval_min, y_min)
        };
        let gap = (primal_value - dual_value).abs();

        let b_scale = 1.0 + b.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        let rp_norm = a
            .iter()
            .zip(&b)
            .map(|(e, v)| (e.dot(&x) - v).abs())
            .fold(0.0_f64, f64::max);
        // Optimal needs the contract tolerances: feasibility to 1e-8,
        // dual slack PSD to 1e-8 and gap below 1e-7. A stalled dual
        // (unattained at degenerate faces) stays MaxIter even when the
        // primal value is exact.
        let gap_ok = gap <= 1e-7 * (1.0 + primal_value.abs() + dual_value.abs());
        let feas_ok = rp_norm <= 1e-8 * b_scale;
        let status = if diverged || (!converged && rp_norm > 1e-4 * b_scale) {
            SdpStatus::Infeasible
        } else if gap_ok && feas_ok && dual_ok {
            SdpStatus::Optimal
        } else {
            SdpStatus::MaxIter
        };

        Ok(SdpSolution {
            primal: x,
            dual,
            primal_value,
            dual_value,
            gap,
            status,
            iterations,
        })
    }
}

/// One entry of a certificate verification report.
#[derive(Debug, Clone, Serialize)]
pub struct CertCheck {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

/// Feasibility/gap report for a primal-dual pair.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<CertCheck>,
    pub all_pass: bool,
}

/// Checks primal feasibility, dual feasibility and the duality gap of a
/// solution against `tol`. Failures land in the report, not in `Err`.
pub fn verify_certificate(
    problem: &SdpProblem,
    solution: &SdpSolution,
    tol: f64,
) -> CertificateReport {
    let mut checks = Vec::new();

    let min_eig = solution.primal.symmetrize().min_eigenvalue();
    checks.push(CertCheck {
        name: "primal psd".into(),
        pass: min_eig >= -tol,
        residual: (-min_eig).max(0.0),
    });

    let mut worst = 0.0_f64;
    for (e, v) in problem.constraints() {
        worst = worst.max((e.dot(&solution.primal) - v).abs());
    }
    checks.push(CertCheck {
        name: "primal constraints".into(),
        pass: worst <= tol,
        residual: worst,
    });

    // Dual slack: sum_i y_i E_i - B >= 0 for max, B - sum_i y_i E_i >= 0 for min.
    let n = problem.block_dim();
    let mut slack = RealMatrix::zeros(n, n);
    for (yi, (e, _)) in solution.dual.iter().zip(problem.constraints()) {
        slack = slack.add(&e.scale(*yi));
    }
    slack = match problem.sense() {
        Sense::Maximize => slack.sub(problem.objective()),
        Sense::Minimize => problem.objective().sub(&slack),
    };
    let dual_min_eig = slack.symmetrize().min_eigenvalue();
    checks.push(CertCheck {
        name: "dual psd slack".into(),
        pass: dual_min_eig >= -tol,
        residual: (-dual_min_eig).max(0.0),
    });

    let gap = (solution.primal_value - solution.dual_value).abs();
    checks.push(CertCheck {
        name: "duality gap".into(),
        pass: gap <= tol,
        residual: gap,
    });

    let all_pass = checks.iter().all(|ch| ch.pass);
    CertificateReport { checks, all_pass }
}
