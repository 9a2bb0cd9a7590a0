//! Hermitian eigensolver: cyclic Jacobi with complex rotations.
//!
//! For the dimensions this crate handles (d <= 64, internally up to a
//! few hundred for real embeddings) Jacobi is plenty fast, needs no
//! external dependency and produces bit-stable, well-orthogonalized
//! eigenvectors.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues ascending, eigenvectors the matching orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// V diag(lambda) V^dagger.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| {
                    v.get(i, k) * Complex64::new(self.eigenvalues[k], 0.0) * v.get(j, k).conj()
                })
                .sum()
        })
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn herm_eig(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    h.check_hermitian("herm_eig")?;
    let n = h.rows();
    if n == 0 {
        return Err(Error::Shape("herm_eig: empty matrix".into()));
    }
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let target = 1e-14 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a.get(p, q);
                let babs = b.norm();
                if babs == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Annihilate (p,q) via the smaller-angle Jacobi root.
                let tau = (aqq - app) / (2.0 * babs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                let phase = b / babs;
                let alpha = phase * sth; // rotation entry, |alpha| = s

                // Columns: A <- A G, with G_pp = c, G_pq = alpha, G_qp = -conj(alpha), G_qq = c.
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * cth - aiq * alpha.conj());
                    a.set(i, q, aip * alpha + aiq * cth);
                }
                // Rows: A <- G^dagger A.
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, apj * cth - aqj * alpha);
                    a.set(q, j, apj * alpha.conj() + aqj * cth);
                }
                a.set(p, p, Complex64::new(app - t * babs, 0.0));
                a.set(q, q, Complex64::new(aqq + t * babs, 0.0));
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));

                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * cth - viq * alpha.conj());
                    v.set(i, q, vip * alpha + viq * cth);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.partial_cmp(&a.get(j, j).re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Cyclic Jacobi for a real symmetric matrix, row-major input.
///
/// Returns eigenvalues ascending and eigenvectors as columns of a
/// row-major n x n buffer. Used by the SDP solver's real path.
pub(crate) fn jacobi_real_sym(n: usize, a_in: &[f64]) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a_in.len(), n * n);
    let mut a = a_in.to_vec();
    // Symmetrize defensively; callers hold symmetric data.
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let target = 1e-14 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[p * n + q];
                if b == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * b);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * c - aiq * s;
                    a[i * n + q] = aip * s + aiq * c;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = apj * c - aqj * s;
                    a[q * n + j] = apj * s + aqj * c;
                }
                a[p * n + p] = app - t * b;
                a[q * n + q] = aqq + t * b;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * c - viq * s;
                    v[i * n + q] = vip * s + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vecs[i * n + newj] = v[i * n + oldj];
        }
    }
    (vals, vecs)
}
