//! Dense complex linear algebra for Hermitian operators on small
//! Hilbert spaces (dimension up to ~64).
//!
//! Everything is double precision and allocation-happy by design; the
//! matrices here never get large enough for that to matter. All
//! functions are pure and safe to call concurrently.

mod eig;

pub(crate) use eig::jacobi_real_sym;
pub use eig::{herm_eig, EigenDecomposition};

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest total dimension `kron` will produce.
pub const MAX_KRON_DIM: usize = 4096;

/// Relative tolerance used for Hermiticity and positivity checks.
pub(crate) const PSD_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {}x{}={} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parameter("matrix entry is not finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Column vector |v> as a d x 1 matrix.
    pub fn ket(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Computational basis vector |k> in dimension d.
    pub fn basis_ket(d: usize, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        Self {
            rows: d,
            cols: 1,
            data: v,
        }
    }

    /// Rank-one matrix |u><w|.
    pub fn outer(u: &[Complex64], w: &[Complex64]) -> Self {
        Self::from_fn(u.len(), w.len(), |i, j| u[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add: shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "sub: shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * factor).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "mul: inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        let data = self.data.iter().map(|z| z.conj()).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace: matrix not square");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to `other`.
    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm()
    }

    /// (A + A^dagger)/2.
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scale_re(0.5)
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.dist(&self.adjoint()) <= rel_tol * (1.0 + self.frobenius_norm())
    }

    pub(crate) fn check_hermitian(&self, what: &str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "{what}: matrix is {}x{}",
                self.rows, self.cols
            )));
        }
        if !self.is_hermitian(PSD_TOL) {
            return Err(Error::NotHermitian(format!(
                "{what}: ||H - H^dag|| = {:.3e}",
                self.dist(&self.adjoint())
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

/// <u|w> with conjugation on the first argument.
pub fn vec_inner(u: &[Complex64], w: &[Complex64]) -> Complex64 {
    u.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product a (x) b. Dimensions multiply; the total output
/// dimension is capped at [`MAX_KRON_DIM`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows > MAX_KRON_DIM || cols > MAX_KRON_DIM {
        return Err(Error::Size(format!(
            "kron result {}x{} exceeds max dimension {}",
            rows, cols, MAX_KRON_DIM
        )));
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<usize> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total || dims.contains(&0) {
        return Err(Error::Shape(format!(
            "subsystem dims {:?} do not match a {}x{} matrix",
            dims,
            m.rows(),
            m.cols()
        )));
    }
    Ok(total)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn decompose(mut idx: usize, dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut multi = Vec::with_capacity(dims.len());
    for s in strides {
        multi.push(idx / s);
        idx %= s;
    }
    multi
}

/// Partial trace over the subsystems not listed in `keep`.
///
/// `keep` holds subsystem indices into `dims`; the marginal keeps them
/// in their original order. Trace is preserved.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    let k = dims.len();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&s| s >= k) {
        return Err(Error::Shape(format!(
            "keep set {:?} out of range for {} subsystems",
            keep, k
        )));
    }
    let traced: Vec<usize> = (0..k).filter(|s| !keep.contains(s)).collect();
    let st = strides(dims);
    let keep_dim: usize = keep.iter().map(|&s| dims[s]).product();
    let traced_dim: usize = traced.iter().map(|&s| dims[s]).product();

    // Flat kept/traced index -> offset into the full index.
    let offset = |subsys: &[usize], flat: usize| -> usize {
        let mut rest = flat;
        let mut off = 0;
        for &s in subsys {
            let later: usize = subsys
                .iter()
                .filter(|&&t| t > s)
                .map(|&t| dims[t])
                .product();
            off += (rest / later) * st[s];
            rest %= later;
        }
        off
    };

    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for i in 0..keep_dim {
        let oi = offset(&keep, i);
        for j in 0..keep_dim {
            let oj = offset(&keep, j);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let ot = offset(&traced, t);
                acc += m.get(oi + ot, oj + ot);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Reorders tensor factors: slot `k` of the output is subsystem
/// `perm[k]` of the input.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &[usize],
    perm: &[usize],
) -> Result<ComplexMatrix> {
    let total = check_dims(m, dims)?;
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::Shape(format!("{:?} is not a permutation", perm)));
    }
    let st_old = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&s| dims[s]).collect();
    let st_new = strides(&new_dims);
    // old flat index for a given new flat index
    let remap = |mut idx: usize| -> usize {
        let mut old = 0;
        for (slot, &s) in perm.iter().enumerate() {
            old += (idx / st_new[slot]) * st_old[s];
            idx %= st_new[slot];
        }
        old
    };
    let lookup: Vec<usize> = (0..total).map(remap).collect();
    Ok(ComplexMatrix::from_fn(total, total, |i, j| {
        m.get(lookup[i], lookup[j])
    }))
}

/// Lifts an operator acting on the `targets` subsystems (in the given
/// order) to the full tensor-product space.
pub fn embed_op(small: &ComplexMatrix, dims: &[usize], targets: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    let target_dim: usize = targets.iter().map(|&s| dims[s]).product();
    if !small.is_square() || small.rows() != target_dim {
        return Err(Error::Shape(format!(
            "operator is {}x{} but targets {:?} of {:?} span dimension {}",
            small.rows(),
            small.cols(),
            targets,
            dims,
            target_dim
        )));
    }
    let mut seen = targets.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != targets.len() || seen.iter().any(|&s| s >= dims.len()) {
        return Err(Error::Shape(format!("invalid target set {:?}", targets)));
    }
    let st = strides(dims);
    let small_index = |multi: &[usize]| -> usize {
        let mut idx = 0;
        for &s in targets {
            idx = idx * dims[s] + multi[s];
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        let mi = decompose(i, dims, &st);
        for j in 0..total {
            let mj = decompose(j, dims, &st);
            let spectator_match = (0..dims.len())
                .filter(|s| !targets.contains(s))
                .all(|s| mi[s] == mj[s]);
            if spectator_match {
                out.set(i, j, small.get(small_index(&mi), small_index(&mj)));
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix clipped to the PSD cone.
///
/// Eigenvalues in `[-tol, 0)` with `tol = 1e-10 * max(1, |lambda|_max)`
/// are clipped to zero; anything below `-tol` is rejected.
pub(crate) fn psd_eig(h: &ComplexMatrix, what: &str) -> Result<(Vec<f64>, ComplexMatrix)> {
    let dec = herm_eig(h)?;
    let scale = dec.eigenvalues.iter().fold(1.0_f64, |m, &l| m.max(l.abs()));
    let tol = PSD_TOL * scale;
    // Debug trace for every clipping decision (set UNCNL_CLIP_TRACE).
    let trace = cfg!(debug_assertions) && std::env::var_os("UNCNL_CLIP_TRACE").is_some();
    let mut vals = Vec::with_capacity(dec.eigenvalues.len());
    for &l in &dec.eigenvalues {
        if l < -tol {
            return Err(Error::NotPsd(format!(
                "{what}: eigenvalue {l:.3e} below -{tol:.3e}"
            )));
        }
        if l < 0.0 && trace {
            eprintln!("psd clip: {what}: {l:.3e} -> 0 (tol {tol:.3e})");
        }
        vals.push(l.max(0.0));
    }
    Ok((vals, dec.eigenvectors))
}

/// Operator norm of a Hermitian matrix (largest |eigenvalue|; equals the
/// largest eigenvalue for PSD input).
pub fn operator_norm(h: &ComplexMatrix) -> Result<f64> {
    h.check_hermitian("operator_norm")?;
    let dec = herm_eig(h)?;
    Ok(dec.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs())))
}

/// Principal square root of a positive semidefinite matrix.
pub fn matrix_sqrt_psd(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    p.check_hermitian("matrix_sqrt_psd")?;
    let (vals, v) = psd_eig(p, "matrix_sqrt_psd")?;
    let n = vals.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        let s = l.sqrt();
        if s == 0.0 {
            continue;
        }
        let col = v.column(k);
        for i in 0..n {
            for j in 0..n {
                let add = col[i] * col[j].conj() * s;
                out.set(i, j, out.get(i, j) + add);
            }
        }
    }
    Ok(out)
}

fn check_subnormalized(m: &ComplexMatrix, what: &str) -> Result<()> {
    m.check_hermitian(what)?;
    let t = m.trace_re();
    if t > 1.0 + 1e-12 {
        return Err(Error::Parameter(format!("{what}: trace {t} exceeds 1")));
    }
    Ok(())
}

/// Generalized fidelity between sub-normalized states,
/// `F = tr|sqrt(rho) sqrt(tau)| + sqrt((1 - tr rho)(1 - tr tau))`.
pub fn fidelity(rho: &ComplexMatrix, tau: &ComplexMatrix) -> Result<f64> {
    check_subnormalized(rho, "fidelity: rho")?;
    check_subnormalized(tau, "fidelity: tau")?;
    if rho.rows() != tau.rows() {
        return Err(Error::Shape("fidelity: dimension mismatch".into()));
    }
    // tr|sqrt(rho) sqrt(tau)| = tr sqrt(sqrt(tau) rho sqrt(tau))
    let st = matrix_sqrt_psd(tau)?;
    let k = st.mul(rho).mul(&st).hermitian_part();
    let (vals, _) = psd_eig(&k, "fidelity")?;
    let nuclear: f64 = vals.iter().map(|l| l.sqrt()).sum();
    let slack = ((1.0 - rho.trace_re()).max(0.0) * (1.0 - tau.trace_re()).max(0.0)).sqrt();
    Ok(nuclear + slack)
}

/// Purified distance `P = sqrt(1 - F^2)`.
pub fn purified_distance(rho: &ComplexMatrix, tau: &ComplexMatrix) -> Result<f64> {
    let f = fidelity(rho, tau)?.min(1.0);
    Ok((1.0 - f * f).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        g.hermitian_part()
    }

    pub(crate) fn random_psd(n: usize, seed: u64) -> ComplexMatrix {
        let h = random_hermitian(n, seed);
        h.mul(&h.adjoint())
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    #[test]
    fn kron_identity_and_diag() {
        let i2 = ComplexMatrix::identity(2);
        let k = kron(&i2, &i2).unwrap();
        assert_eq!(k, ComplexMatrix::identity(4));

        let a = ComplexMatrix::diag(&[1.0, 2.0]);
        let b = ComplexMatrix::diag(&[1.0, 3.0]);
        let k = kron(&a, &b).unwrap();
        assert_eq!(k, ComplexMatrix::diag(&[1.0, 3.0, 2.0, 6.0]));
    }

    #[test]
    fn kron_flips_basis_state() {
        // (sigma_x (x) sigma_x) |00> = |11>, by hand expansion of the 4x4 product.
        let xx = kron(&sigma_x(), &sigma_x()).unwrap();
        let v00 = ComplexMatrix::basis_ket(4, 0);
        let out = xx.mul(&v00);
        assert!(out.dist(&ComplexMatrix::basis_ket(4, 3)) < 1e-15);
    }

    #[test]
    fn kron_size_limit() {
        let big = ComplexMatrix::identity(128);
        let err = kron(&big, &big).unwrap_err();
        assert!(matches!(err, Error::Size(_)));
    }

    #[test]
    fn partial_trace_product_state() {
        let rho_a = random_psd(2, 7);
        let rho_a = rho_a.scale_re(1.0 / rho_a.trace_re());
        let rho_b = random_psd(3, 8);
        let rho_b = rho_b.scale_re(1.0 / rho_b.trace_re());
        let joint = kron(&rho_a, &rho_b).unwrap();
        let red = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(red.dist(&rho_a) < 1e-12);
        let red_b = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(red_b.dist(&rho_b) < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let mut psi = vec![c(0., 0.); 4];
        psi[0] = c(1.0 / 2f64.sqrt(), 0.);
        psi[3] = c(1.0 / 2f64.sqrt(), 0.);
        let rho = ComplexMatrix::outer(&psi, &psi);
        let red = partial_trace(&rho, &[2, 2], &[1]).unwrap();
        assert!(red.dist(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        // Oracle: direct summation over index pairs of a random 2x3 state.
        let rho = random_psd(6, 3);
        let rho = rho.scale_re(1.0 / rho.trace_re());
        let red = partial_trace(&rho, &[2, 3], &[0]).unwrap();
        assert!((red.trace_re() - 1.0).abs() < 1e-12);
        // Cross-check one marginal entry against explicit index arithmetic.
        let mut direct = c(0., 0.);
        for t in 0..3 {
            direct += rho.get(t, 3 + t); // (0,t),(1,t) entry with B index t
        }
        assert!((red.get(0, 1) - direct).norm() < 1e-14);
    }

    #[test]
    fn embed_op_matches_kron_on_adjacent_targets() {
        let op = random_hermitian(2, 11);
        let dims = [2usize, 3, 2];
        let full = embed_op(&op, &dims, &[0]).unwrap();
        let via_kron = kron(&op, &ComplexMatrix::identity(6)).unwrap();
        assert!(full.dist(&via_kron) < 1e-14);

        let last = embed_op(&op, &dims, &[2]).unwrap();
        let via_kron = kron(&ComplexMatrix::identity(6), &op).unwrap();
        assert!(last.dist(&via_kron) < 1e-14);
    }

    #[test]
    fn embed_op_respects_target_order() {
        // Targets given in reversed order embed the operator with its
        // factor order swapped.
        let a = random_hermitian(2, 41);
        let b = random_hermitian(3, 42);
        let ab = kron(&a, &b).unwrap();
        let ba = kron(&b, &a).unwrap();
        let forward = embed_op(&ab, &[2, 3], &[0, 1]).unwrap();
        assert!(forward.dist(&ab) < 1e-14);
        let reversed = embed_op(&ba, &[2, 3], &[1, 0]).unwrap();
        assert!(reversed.dist(&ab) < 1e-14);
    }

    #[test]
    fn permute_subsystems_reorders_kron() {
        let a = random_hermitian(2, 31);
        let b = random_hermitian(3, 32);
        let ab = kron(&a, &b).unwrap();
        let ba = kron(&b, &a).unwrap();
        let swapped = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!(swapped.dist(&ba) < 1e-14);

        // Three factors: pull the last one to the front.
        let c3 = random_hermitian(2, 33);
        let abc = kron(&ab, &c3).unwrap();
        let cab = kron(&c3, &ab).unwrap();
        let rolled = permute_subsystems(&abc, &[2, 3, 2], &[2, 0, 1]).unwrap();
        assert!(rolled.dist(&cab) < 1e-14);
    }

    #[test]
    fn embed_op_middle_subsystem() {
        let op = random_hermitian(3, 13);
        let dims = [2usize, 3, 2];
        let full = embed_op(&op, &dims, &[1]).unwrap();
        let expect = kron(
            &kron(&ComplexMatrix::identity(2), &op).unwrap(),
            &ComplexMatrix::identity(2),
        )
        .unwrap();
        assert!(full.dist(&expect) < 1e-14);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::diag(&[1.0, 2.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!((operator_norm(&ComplexMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-12);
        // Rank-2 projector has norm 1.
        let p = ComplexMatrix::diag(&[1.0, 1.0, 0.0]);
        assert!((operator_norm(&p).unwrap() - 1.0).abs() < 1e-12);
        // Non-Hermitian input is rejected.
        let bad =
            ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(operator_norm(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn operator_norm_submultiplicative_and_unitarily_invariant() {
        // ||ABA|| <= ||A||^2 ||B|| keeps all arguments Hermitian.
        for seed in 0..20u64 {
            let a = random_hermitian(5, 100 + seed);
            let b = random_hermitian(5, 200 + seed);
            let aba = a.mul(&b).mul(&a).hermitian_part();
            let na = operator_norm(&a).unwrap();
            let nb = operator_norm(&b).unwrap();
            assert!(operator_norm(&aba).unwrap() <= na * na * nb + 1e-9);
        }
        // Conjugation by the eigenvector matrix of a random Hermitian is unitary.
        let h = random_hermitian(6, 42);
        let u = herm_eig(&random_hermitian(6, 43)).unwrap().eigenvectors;
        let rotated = u.mul(&h).mul(&u.adjoint()).hermitian_part();
        assert!((operator_norm(&rotated).unwrap() - operator_norm(&h).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sqrt_psd_examples() {
        let s = matrix_sqrt_psd(&ComplexMatrix::diag(&[4.0, 9.0])).unwrap();
        assert!(s.dist(&ComplexMatrix::diag(&[2.0, 3.0])) < 1e-12);

        // Projectors are their own square roots.
        let p = ComplexMatrix::outer(
            &[c(1. / 2f64.sqrt(), 0.), c(1. / 2f64.sqrt(), 0.)],
            &[c(1. / 2f64.sqrt(), 0.), c(1. / 2f64.sqrt(), 0.)],
        );
        assert!(matrix_sqrt_psd(&p).unwrap().dist(&p) < 1e-10);

        // Reconstruction oracle on a random PSD 4x4.
        let m = random_psd(4, 21);
        let s = matrix_sqrt_psd(&m).unwrap();
        assert!(s.mul(&s).dist(&m) < 1e-9 * (1.0 + m.frobenius_norm()));

        let neg = ComplexMatrix::diag(&[1.0, -0.5]);
        assert!(matches!(matrix_sqrt_psd(&neg), Err(Error::NotPsd(_))));
    }

    #[test]
    fn fidelity_and_purified_distance() {
        let rho = {
            let p = random_psd(3, 5);
            p.scale_re(1.0 / p.trace_re())
        };
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        assert!(purified_distance(&rho, &rho).unwrap() < 2e-5);

        let p0 = ComplexMatrix::diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag(&[0.0, 1.0]);
        assert!(fidelity(&p0, &p1).unwrap() < 1e-9);
        assert!((purified_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-9);

        // Pure vs maximally mixed: F = sqrt(<0|tau|0>) = 1/sqrt(2).
        let mixed = ComplexMatrix::identity(2).scale_re(0.5);
        let f = fidelity(&p0, &mixed).unwrap();
        assert!((f - 1.0 / 2f64.sqrt()).abs() < 1e-10);
        let p = purified_distance(&p0, &mixed).unwrap();
        assert!((p - 1.0 / 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn purified_distance_symmetric_and_triangle() {
        for seed in 0..12u64 {
            let mk = |s| {
                let p = random_psd(3, s);
                p.scale_re(1.0 / p.trace_re())
            };
            let (a, b, g) = (mk(3 * seed), mk(3 * seed + 1), mk(3 * seed + 2));
            let pab = purified_distance(&a, &b).unwrap();
            let pba = purified_distance(&b, &a).unwrap();
            assert!((pab - pba).abs() < 1e-9);
            let pag = purified_distance(&a, &g).unwrap();
            let pgb = purified_distance(&g, &b).unwrap();
            assert!(pab <= pag + pgb + 1e-9);
        }
    }

    #[test]
    fn purified_distance_monotone_under_partial_trace() {
        for seed in 0..10u64 {
            let mk = |s| {
                let p = random_psd(4, s);
                p.scale_re(1.0 / p.trace_re())
            };
            let (a, b) = (mk(50 + 2 * seed), mk(51 + 2 * seed));
            let pa = partial_trace(&a, &[2, 2], &[0]).unwrap();
            let pb = partial_trace(&b, &[2, 2], &[0]).unwrap();
            assert!(
                purified_distance(&pa, &pb).unwrap() <= purified_distance(&a, &b).unwrap() + 1e-9
            );
        }
    }

    #[test]
    fn lemma_partial_trace_norm_bound() {
        // tr_A(sum_k E_k M E_k^dag) <= ||sum_k E_k^dag E_k|| tr_A(M) as operators.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let (da, db) = (2usize, 3usize);
            let m = {
                let seed = rng.gen::<u64>();
                let p = random_psd(da * db, seed);
                p.scale_re(1.0 / p.trace_re())
            };
            let kraus: Vec<ComplexMatrix> = (0..3)
                .map(|_| {
                    let seed = rng.gen::<u64>();
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    ComplexMatrix::from_fn(da, da, |_, _| {
                        c(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5)
                    })
                })
                .collect();
            let mut lhs_full = ComplexMatrix::zeros(da * db, da * db);
            let mut gram = ComplexMatrix::zeros(da, da);
            for e in &kraus {
                let ef = kron(e, &ComplexMatrix::identity(db)).unwrap();
                lhs_full = lhs_full.add(&ef.mul(&m).mul(&ef.adjoint()));
                gram = gram.add(&e.adjoint().mul(e));
            }
            let lhs = partial_trace(&lhs_full, &[da, db], &[1]).unwrap();
            let bound = operator_norm(&gram.hermitian_part()).unwrap();
            let rhs = partial_trace(&m, &[da, db], &[1]).unwrap().scale_re(bound);
            let gap = rhs.sub(&lhs).hermitian_part();
            let min_eig = herm_eig(&gap).unwrap().eigenvalues[0];
            assert!(min_eig >= -1e-9, "operator inequality violated: {min_eig}");
        }
    }
}
