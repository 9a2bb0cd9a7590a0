//! Quantum states and measurement models: density operators, binary
//! POVMs, projective measurements, +/-1 observables, measurement
//! channels, purification, Neumark dilation and seeded random instance
//! generators.
//!
//! Generators take an explicit 64-bit seed and are stateless between
//! calls; identical seeds give bit-identical output.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{embed_op, herm_eig, kron, partial_trace, psd_eig, vec_norm, ComplexMatrix};
use crate::{Error, Result};

const TOL_STATE: f64 = 1e-10;
const TOL_PROJ: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Normalized (or explicitly sub-normalized) PSD operator together with
/// its subsystem dimension list.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Unit-trace state. Hermiticity, positivity and trace are checked
    /// to 1e-10 (relative).
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let s = Self::new_sub_normalized(mat, dims)?;
        let t = s.trace();
        if (t - 1.0).abs() > TOL_STATE {
            return Err(Error::Parameter(format!("state trace {t} differs from 1")));
        }
        Ok(s)
    }

    /// Sub-normalized variant: trace in (0, 1].
    pub fn new_sub_normalized(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !mat.is_square() || mat.rows() != total || dims.is_empty() {
            return Err(Error::Shape(format!(
                "dims {:?} do not match a {}x{} matrix",
                dims,
                mat.rows(),
                mat.cols()
            )));
        }
        mat.check_hermitian("density operator")?;
        psd_eig(&mat, "density operator")?;
        let t = mat.trace_re();
        if t <= 0.0 || t > 1.0 + TOL_STATE {
            return Err(Error::Parameter(format!("trace {t} outside (0, 1]")));
        }
        Ok(Self { mat, dims })
    }

    /// Pure state |psi><psi| from an unnormalized amplitude vector.
    pub fn from_state_vector(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let n = vec_norm(psi);
        if n == 0.0 {
            return Err(Error::Parameter("zero state vector".into()));
        }
        let normalized: Vec<Complex64> = psi.iter().map(|z| z / n).collect();
        Self::new(ComplexMatrix::outer(&normalized, &normalized), dims)
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace_re()
    }

    /// Marginal on the listed subsystems (original order preserved).
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        let mat = partial_trace(&self.mat, &self.dims, keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let dims = sorted.iter().map(|&s| self.dims[s]).collect();
        Ok(DensityOperator { mat, dims })
    }

    /// Reinterprets the same matrix with a different subsystem split.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<DensityOperator> {
        if dims.iter().product::<usize>() != self.total_dim() {
            return Err(Error::Shape(format!(
                "regroup dims {:?} do not span dimension {}",
                dims,
                self.total_dim()
            )));
        }
        Ok(DensityOperator {
            mat: self.mat.clone(),
            dims,
        })
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        let purity = self.mat.mul(&self.mat).trace_re();
        let t = self.trace();
        (purity - t * t).abs() <= tol
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(herm_eig(&self.mat)?.eigenvalues)
    }
}

/// Two-outcome POVM {E_0, E_1} with E_0 + E_1 = 1.
#[derive(Debug, Clone)]
pub struct BinaryPovm {
    e0: ComplexMatrix,
    e1: ComplexMatrix,
}

impl BinaryPovm {
    pub fn new(e0: ComplexMatrix, e1: ComplexMatrix) -> Result<Self> {
        if !e0.is_square() || e0.rows() != e1.rows() || !e1.is_square() {
            return Err(Error::Shape(
                "POVM elements must be square and same size".into(),
            ));
        }
        e0.check_hermitian("POVM element 0")?;
        e1.check_hermitian("POVM element 1")?;
        psd_eig(&e0, "POVM element 0")?;
        psd_eig(&e1, "POVM element 1")?;
        let sum = e0.add(&e1);
        let id = ComplexMatrix::identity(e0.rows());
        if sum.dist(&id) > TOL_STATE * (1.0 + id.frobenius_norm()) {
            return Err(Error::Parameter(format!(
                "POVM elements sum to identity only within {:.3e}",
                sum.dist(&id)
            )));
        }
        Ok(Self { e0, e1 })
    }

    /// M_x = (1 +/- O)/2 for a binary-spectrum observable.
    pub fn from_observable(o: &Observable) -> Result<Self> {
        let id = ComplexMatrix::identity(o.mat().rows());
        Self::new(id.add(o.mat()).scale_re(0.5), id.sub(o.mat()).scale_re(0.5))
    }

    pub fn element(&self, x: usize) -> &ComplexMatrix {
        match x {
            0 => &self.e0,
            1 => &self.e1,
            _ => panic!("binary POVM outcome index {x}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.e0.rows()
    }

    /// O = E_0 - E_1.
    pub fn observable(&self) -> Result<Observable> {
        Observable::new(self.e0.sub(&self.e1))
    }

    pub fn is_projective(&self, tol: f64) -> bool {
        let p2 = self.e0.mul(&self.e0);
        p2.dist(&self.e0) <= tol * (1.0 + self.e0.frobenius_norm())
    }

    /// Views a projective binary POVM as a projective measurement.
    pub fn to_projective(&self) -> Result<ProjectiveMeasurement> {
        ProjectiveMeasurement::new(vec![self.e0.clone(), self.e1.clone()])
    }
}

/// Complete set of mutually orthogonal projectors.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    projectors: Vec<ComplexMatrix>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::Parameter("no projectors".into()));
        }
        let d = projectors[0].rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (k, p) in projectors.iter().enumerate() {
            if !p.is_square() || p.rows() != d {
                return Err(Error::Shape("projector dimensions differ".into()));
            }
            p.check_hermitian("projector")?;
            let scale = 1.0 + p.frobenius_norm();
            if p.mul(p).dist(p) > TOL_PROJ * scale {
                return Err(Error::Parameter(format!("element {k} is not idempotent")));
            }
            for q in projectors.iter().take(k) {
                if p.mul(q).frobenius_norm() > TOL_PROJ * scale {
                    return Err(Error::Parameter(
                        "projectors are not mutually orthogonal".into(),
                    ));
                }
            }
            sum = sum.add(p);
        }
        if sum.dist(&ComplexMatrix::identity(d)) > TOL_PROJ * (d as f64).sqrt() {
            return Err(Error::Parameter("projectors do not sum to identity".into()));
        }
        Ok(Self { projectors })
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn to_binary_povm(&self) -> Result<BinaryPovm> {
        if self.projectors.len() != 2 {
            return Err(Error::Shape(format!(
                "{} outcomes, need 2",
                self.projectors.len()
            )));
        }
        BinaryPovm::new(self.projectors[0].clone(), self.projectors[1].clone())
    }
}

/// Hermitian operator with spectrum in [-1, 1].
#[derive(Debug, Clone)]
pub struct Observable {
    mat: ComplexMatrix,
}

impl Observable {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        mat.check_hermitian("observable")?;
        let dec = herm_eig(&mat)?;
        let lo = dec.eigenvalues.first().copied().unwrap_or(0.0);
        let hi = dec.eigenvalues.last().copied().unwrap_or(0.0);
        if lo < -1.0 - TOL_PROJ || hi > 1.0 + TOL_PROJ {
            return Err(Error::Parameter(format!(
                "observable spectrum [{lo:.6}, {hi:.6}] leaves [-1, 1]"
            )));
        }
        Ok(Self { mat })
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// O^2 = 1 within `tol` (spectrum in {-1, +1}).
    pub fn is_binary_spectrum(&self, tol: f64) -> bool {
        let sq = self.mat.mul(&self.mat);
        sq.dist(&ComplexMatrix::identity(self.mat.rows())) <= tol * (self.mat.rows() as f64).sqrt()
    }

    pub(crate) fn check_binary_spectrum(&self, what: &str) -> Result<()> {
        if !self.is_binary_spectrum(TOL_PROJ) {
            return Err(Error::Parameter(format!(
                "{what}: observable does not square to 1"
            )));
        }
        Ok(())
    }
}

/// Classical-quantum state: outcome labels with weights and normalized
/// conditional states (zero matrix for zero-weight outcomes).
#[derive(Debug, Clone)]
pub struct CqState {
    labels: Vec<usize>,
    weights: Vec<f64>,
    conditionals: Vec<ComplexMatrix>,
    cond_dims: Vec<usize>,
}

impl CqState {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn conditional(&self, k: usize) -> &ComplexMatrix {
        &self.conditionals[k]
    }

    pub fn conditional_state(&self, k: usize) -> Option<DensityOperator> {
        if self.weights[k] <= 1e-12 {
            return None;
        }
        DensityOperator::new_sub_normalized(self.conditionals[k].clone(), self.cond_dims.clone())
            .ok()
    }

    /// Joint classical-quantum density operator
    /// sum_x p_x |x><x| (x) rho^x with dims [outcomes, conditional dim].
    pub fn joint(&self) -> Result<DensityOperator> {
        let n = self.labels.len();
        let db: usize = self.cond_dims.iter().product();
        let mut m = ComplexMatrix::zeros(n * db, n * db);
        for (x, cond) in self.conditionals.iter().enumerate() {
            let w = self.weights[x];
            if w <= 0.0 {
                continue;
            }
            for i in 0..db {
                for j in 0..db {
                    m.set(x * db + i, x * db + j, cond.get(i, j) * c(w, 0.0));
                }
            }
        }
        DensityOperator::new_sub_normalized(m, vec![n, db])
    }
}

/// Outcome probabilities p_x = tr(E_x rho).
pub fn born_probabilities(rho: &DensityOperator, m: &BinaryPovm) -> Result<(f64, f64)> {
    if m.dim() != rho.total_dim() {
        return Err(Error::Shape(format!(
            "POVM dimension {} vs state dimension {}",
            m.dim(),
            rho.total_dim()
        )));
    }
    let p0 = m.element(0).mul(rho.mat()).trace_re();
    let p1 = m.element(1).mul(rho.mat()).trace_re();
    Ok((p0.max(0.0), p1.max(0.0)))
}

/// Measures `subsystem` of `rho` with a binary POVM and keeps the other
/// subsystems quantum:
/// rho_XB = sum_x |x><x| (x) tr_A((E_x (x) 1) rho).
pub fn measure_cq(rho: &DensityOperator, m: &BinaryPovm, subsystem: usize) -> Result<CqState> {
    let dims = rho.dims();
    if subsystem >= dims.len() {
        return Err(Error::Shape(format!("subsystem {subsystem} of {:?}", dims)));
    }
    if m.dim() != dims[subsystem] {
        return Err(Error::Shape(format!(
            "POVM dimension {} vs subsystem dimension {}",
            m.dim(),
            dims[subsystem]
        )));
    }
    let keep: Vec<usize> = (0..dims.len()).filter(|&s| s != subsystem).collect();
    let cond_dims: Vec<usize> = if keep.is_empty() {
        vec![1]
    } else {
        keep.iter().map(|&s| dims[s]).collect()
    };
    let mut weights = Vec::with_capacity(2);
    let mut conditionals = Vec::with_capacity(2);
    for x in 0..2 {
        let lifted = embed_op(m.element(x), dims, &[subsystem])?;
        let piece = lifted.mul(rho.mat());
        let sigma = if keep.is_empty() {
            ComplexMatrix::new(1, 1, vec![piece.trace()])?
        } else {
            partial_trace(&piece, dims, &keep)?
        };
        // The Hermitian part removes the O(eps) skew of E_x rho.
        let sigma = sigma.hermitian_part();
        let p = sigma.trace_re().max(0.0);
        weights.push(p);
        if p > 1e-12 {
            conditionals.push(sigma.scale_re(1.0 / sigma.trace_re()));
        } else {
            conditionals.push(ComplexMatrix::zeros(sigma.rows(), sigma.cols()));
        }
    }
    Ok(CqState {
        labels: vec![0, 1],
        weights,
        conditionals,
        cond_dims,
    })
}

/// Appends a purifying subsystem: returns a pure state whose marginal
/// over the last subsystem is `rho`. The purifier dimension equals the
/// rank of `rho`.
pub fn purify(rho: &DensityOperator) -> Result<DensityOperator> {
    let (vals, vecs) = psd_eig(rho.mat(), "purify")?;
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = 1e-14 * lmax.max(1.0);
    let support: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cutoff).collect();
    let rank = support.len().max(1);
    let d = rho.total_dim();
    let mut psi = vec![c(0.0, 0.0); d * rank];
    for (slot, &k) in support.iter().enumerate() {
        let amp = vals[k].sqrt();
        let col = vecs.column(k);
        for i in 0..d {
            psi[i * rank + slot] = col[i] * c(amp, 0.0);
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.push(rank);
    // Keep sub-normalization: tr |psi><psi| = tr rho.
    DensityOperator::new_sub_normalized(ComplexMatrix::outer(&psi, &psi), dims)
}

/// Neumark dilation of a binary POVM: isometry V = sum_x sqrt(E_x) (x) |x>
/// into A (x) C^2 and the projective measurement {1 (x) |x><x|}.
///
/// Projective input returns the identity embedding and the measurement
/// itself.
pub fn neumark_dilate(m: &BinaryPovm) -> Result<(ComplexMatrix, ProjectiveMeasurement)> {
    let d = m.dim();
    if m.is_projective(TOL_PROJ) {
        let pm = ProjectiveMeasurement::new(vec![m.element(0).clone(), m.element(1).clone()])?;
        return Ok((ComplexMatrix::identity(d), pm));
    }
    let s0 = crate::linalg::matrix_sqrt_psd(m.element(0))?;
    let s1 = crate::linalg::matrix_sqrt_psd(m.element(1))?;
    let v = kron(&s0, &ComplexMatrix::basis_ket(2, 0))?
        .add(&kron(&s1, &ComplexMatrix::basis_ket(2, 1))?);
    let id = ComplexMatrix::identity(d);
    let proj = |x: usize| -> Result<ComplexMatrix> {
        let mut e = ComplexMatrix::zeros(2, 2);
        e.set(x, x, c(1.0, 0.0));
        kron(&id, &e)
    };
    let pm = ProjectiveMeasurement::new(vec![proj(0)?, proj(1)?])?;
    Ok((v, pm))
}

/// Isotropic-noise two-qubit source state
/// v |Phi+><Phi+| + (1 - v) 1/4.
pub fn bb84_source_state(visibility: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Parameter(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    let s = 1.0 / 2f64.sqrt();
    let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
    let phi = ComplexMatrix::outer(&psi, &psi);
    let mat = phi
        .scale_re(visibility)
        .add(&ComplexMatrix::identity(4).scale_re((1.0 - visibility) / 4.0));
    DensityOperator::new(mat, vec![2, 2])
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary via QR of a Ginibre matrix (modified
/// Gram-Schmidt with phase fixing).
pub(crate) fn haar_unitary(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|j| g.column(j)).collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: Complex64 = crate::linalg::vec_inner(&cols[k], &cols[j]);
            for i in 0..dim {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let r = vec_norm(&cols[j]);
        for z in cols[j].iter_mut() {
            *z /= r;
        }
        // Fix the phase so the distribution is Haar, not QR-biased.
        let diag = cols[j][j];
        if diag.norm() > 1e-14 {
            let phase = diag.conj() / diag.norm();
            for z in cols[j].iter_mut() {
                *z *= phase;
            }
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Ginibre-induced random state of the given rank.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::Parameter(format!("rank {rank} outside 1..={dim}")));
    }
    let mut rng = rng_from_seed(seed);
    let g = ginibre(dim, rank, &mut rng);
    let m = g.mul(&g.adjoint()).hermitian_part();
    let m = m.scale_re(1.0 / m.trace_re());
    DensityOperator::new(m, vec![dim])
}

/// Random binary POVM from a Haar-random isometry into C^{2d}, sliced
/// into two d-dimensional output chunks.
pub fn random_binary_povm(dim: usize, seed: u64) -> Result<BinaryPovm> {
    let mut rng = rng_from_seed(seed);
    let u = haar_unitary(2 * dim, &mut rng);
    let block = |x: usize| {
        // rows x*dim..(x+1)*dim of the first `dim` columns of u
        ComplexMatrix::from_fn(dim, dim, |i, j| u.get(x * dim + i, j))
    };
    let b0 = block(0);
    let b1 = block(1);
    BinaryPovm::new(
        b0.adjoint().mul(&b0).hermitian_part(),
        b1.adjoint().mul(&b1).hermitian_part(),
    )
}

/// Random pure state on an arbitrary subsystem split.
pub fn random_pure_tripartite(dims: &[usize], seed: u64) -> Result<DensityOperator> {
    let total: usize = dims.iter().product();
    if total == 0 {
        return Err(Error::Parameter("empty dimension list".into()));
    }
    let mut rng = rng_from_seed(seed);
    let g = ginibre(total, 1, &mut rng);
    DensityOperator::from_state_vector(&g.column(0), dims.to_vec())
}

/// Random binary projective measurement; the rank of the first
/// projector is drawn uniformly from 1..dim.
pub fn random_binary_projective(dim: usize, seed: u64) -> Result<ProjectiveMeasurement> {
    if dim < 2 {
        return Err(Error::Parameter(format!("dimension {dim} below 2")));
    }
    let mut rng = rng_from_seed(seed);
    let rank = rng.gen_range(1..dim);
    let u = haar_unitary(dim, &mut rng);
    let mut p0 = ComplexMatrix::zeros(dim, dim);
    for k in 0..rank {
        let col = u.column(k);
        p0 = p0.add(&ComplexMatrix::outer(&col, &col));
    }
    let p0 = p0.hermitian_part();
    let p1 = ComplexMatrix::identity(dim).sub(&p0);
    ProjectiveMeasurement::new(vec![p0, p1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp_basis() -> BinaryPovm {
        BinaryPovm::new(
            ComplexMatrix::diag(&[1.0, 0.0]),
            ComplexMatrix::diag(&[0.0, 1.0]),
        )
        .unwrap()
    }

    fn plus_state() -> DensityOperator {
        let s = 1.0 / 2f64.sqrt();
        DensityOperator::from_state_vector(&[c(s, 0.0), c(s, 0.0)], vec![2]).unwrap()
    }

    fn bell_state() -> DensityOperator {
        bb84_source_state(1.0).unwrap()
    }

    #[test]
    fn born_rule_cases() {
        let mixed =
            DensityOperator::new(ComplexMatrix::identity(2).scale_re(0.5), vec![2]).unwrap();
        let (p0, p1) = born_probabilities(&mixed, &comp_basis()).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);

        let zero = DensityOperator::new(ComplexMatrix::diag(&[1.0, 0.0]), vec![2]).unwrap();
        let (p0, p1) = born_probabilities(&zero, &comp_basis()).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12 && p1 < 1e-12);

        // |+> in the computational basis: expand |+> = (|0> + |1>)/sqrt(2).
        let (p0, p1) = born_probabilities(&plus_state(), &comp_basis()).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measure_cq_product_state() {
        let rho_b = random_state(3, 2, 17).unwrap();
        let rho_a = plus_state();
        let joint =
            DensityOperator::new(kron(rho_a.mat(), rho_b.mat()).unwrap(), vec![2, 3]).unwrap();
        let cq = measure_cq(&joint, &comp_basis(), 0).unwrap();
        for x in 0..2 {
            assert!((cq.weights()[x] - 0.5).abs() < 1e-10);
            assert!(cq.conditional(x).dist(rho_b.mat()) < 1e-10);
        }
    }

    #[test]
    fn measure_cq_bell_state() {
        let cq = measure_cq(&bell_state(), &comp_basis(), 0).unwrap();
        assert!((cq.weights()[0] - 0.5).abs() < 1e-12);
        assert!((cq.weights()[1] - 0.5).abs() < 1e-12);
        assert!(cq.conditional(0).dist(&ComplexMatrix::diag(&[1.0, 0.0])) < 1e-10);
        assert!(cq.conditional(1).dist(&ComplexMatrix::diag(&[0.0, 1.0])) < 1e-10);
    }

    #[test]
    fn measure_cq_trivial_povm() {
        let rho = bell_state();
        let trivial =
            BinaryPovm::new(ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)).unwrap();
        let cq = measure_cq(&rho, &trivial, 0).unwrap();
        assert!((cq.weights()[0] - 1.0).abs() < 1e-12);
        assert!(cq.weights()[1] < 1e-12);
        let rho_b = rho.marginal(&[1]).unwrap();
        assert!(cq.conditional(0).dist(rho_b.mat()) < 1e-10);
    }

    #[test]
    fn measure_cq_preserves_marginal() {
        // sum_x p_x rho^x = tr_A(rho), and measuring commutes with
        // discarding the quantum side.
        let rho = random_state(6, 6, 5).unwrap().regroup(vec![2, 3]).unwrap();
        let povm = random_binary_povm(2, 6).unwrap();
        let cq = measure_cq(&rho, &povm, 0).unwrap();
        let mut mix = ComplexMatrix::zeros(3, 3);
        for x in 0..2 {
            mix = mix.add(&cq.conditional(x).scale_re(cq.weights()[x]));
        }
        let rho_b = rho.marginal(&[1]).unwrap();
        assert!(mix.dist(rho_b.mat()) < 1e-10);

        // Weights agree with measuring the A marginal alone.
        let rho_a = rho.marginal(&[0]).unwrap();
        let (p0, p1) = born_probabilities(&rho_a, &povm).unwrap();
        assert!((cq.weights()[0] - p0).abs() < 1e-10);
        assert!((cq.weights()[1] - p1).abs() < 1e-10);
    }

    #[test]
    fn purify_round_trip() {
        let pure = plus_state();
        let p = purify(&pure).unwrap();
        assert_eq!(p.dims(), &[2, 1]);
        assert!(p.is_pure(1e-9));

        let mixed =
            DensityOperator::new(ComplexMatrix::identity(2).scale_re(0.5), vec![2]).unwrap();
        let p = purify(&mixed).unwrap();
        assert!(p.is_pure(1e-9));
        assert!(p.marginal(&[0]).unwrap().mat().dist(mixed.mat()) < 1e-10);

        let rho = random_state(4, 3, 9).unwrap();
        let p = purify(&rho).unwrap();
        assert_eq!(p.dims(), &[4, 3]);
        assert!(p.is_pure(1e-9));
        assert!(p.marginal(&[0]).unwrap().mat().dist(rho.mat()) < 1e-10);
    }

    #[test]
    fn neumark_projective_input_is_identity() {
        let (v, pm) = neumark_dilate(&comp_basis()).unwrap();
        assert_eq!(v.rows(), 2);
        assert!(v.dist(&ComplexMatrix::identity(2)) < 1e-12);
        assert_eq!(pm.outcomes(), 2);
    }

    #[test]
    fn neumark_dilates_noisy_povm() {
        // Trine-like smeared POVM {2/3 |0><0|, 1 - 2/3 |0><0|}.
        let e0 = ComplexMatrix::diag(&[2.0 / 3.0, 0.0]);
        let e1 = ComplexMatrix::identity(2).sub(&e0);
        let m = BinaryPovm::new(e0.clone(), e1.clone()).unwrap();
        let (v, pm) = neumark_dilate(&m).unwrap();
        assert!(v.adjoint().mul(&v).dist(&ComplexMatrix::identity(2)) < 1e-10);
        for (x, e) in [(0usize, &e0), (1usize, &e1)] {
            let pulled = v.adjoint().mul(&pm.projectors()[x]).mul(&v);
            assert!(pulled.dist(e) < 1e-9);
        }
    }

    #[test]
    fn neumark_preserves_statistics() {
        // Embedded state + dilated measurement reproduce the original
        // outcome statistics, for a white-noise POVM and a random one.
        for seed in [3u64, 4, 5] {
            let m = if seed == 3 {
                BinaryPovm::new(
                    ComplexMatrix::identity(2).scale_re(0.5),
                    ComplexMatrix::identity(2).scale_re(0.5),
                )
                .unwrap()
            } else {
                random_binary_povm(2, seed).unwrap()
            };
            let rho = random_state(2, 2, 100 + seed).unwrap();
            let (p0, p1) = born_probabilities(&rho, &m).unwrap();
            if seed == 3 {
                assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
            }
            let (v, pm) = neumark_dilate(&m).unwrap();
            let embedded = v.mul(rho.mat()).mul(&v.adjoint());
            let q0 = pm.projectors()[0].mul(&embedded).trace_re();
            let q1 = pm.projectors()[1].mul(&embedded).trace_re();
            assert!((p0 - q0).abs() < 1e-9 && (p1 - q1).abs() < 1e-9);
        }
    }

    #[test]
    fn bb84_source_limits() {
        let ideal = bb84_source_state(1.0).unwrap();
        assert!(ideal.is_pure(1e-10));
        let white = bb84_source_state(0.0).unwrap();
        assert!(white.mat().dist(&ComplexMatrix::identity(4).scale_re(0.25)) < 1e-12);
        assert!(bb84_source_state(1.5).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_state(4, 4, 111).unwrap();
        let b = random_state(4, 4, 111).unwrap();
        assert_eq!(a.mat().data(), b.mat().data());
        assert!((a.trace() - 1.0).abs() < 1e-12);

        let p = random_binary_projective(2, 12).unwrap();
        let q = random_binary_projective(2, 12).unwrap();
        assert_eq!(p.projectors()[0].data(), q.projectors()[0].data());

        let m = random_binary_povm(3, 9).unwrap();
        let m2 = random_binary_povm(3, 9).unwrap();
        assert_eq!(m.element(0).data(), m2.element(0).data());

        let t = random_pure_tripartite(&[2, 2, 2], 77).unwrap();
        assert!(t.is_pure(1e-10));
        assert_eq!(t.dims(), &[2, 2, 2]);
    }

    #[test]
    fn observable_povm_round_trip() {
        for seed in 0..8u64 {
            let m = random_binary_projective(3, seed)
                .unwrap()
                .to_binary_povm()
                .unwrap();
            let o = m.observable().unwrap();
            assert!(o.is_binary_spectrum(1e-9));
            let back = BinaryPovm::from_observable(&o).unwrap();
            assert!(back.element(0).dist(m.element(0)) < 1e-12);
            assert!(back.element(1).dist(m.element(1)) < 1e-12);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(31);
        let u = haar_unitary(5, &mut rng);
        assert!(u.adjoint().mul(&u).dist(&ComplexMatrix::identity(5)) < 1e-12);
    }
}
