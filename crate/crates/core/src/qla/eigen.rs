//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a
//! diagonal unitary, then applies a real Givens rotation that annihilates
//! it. Sweeps run over all pivots `p < q` until the off-diagonal Frobenius
//! norm drops below `OFF_DIAGONAL_TOL · max(1, ‖A‖_F)`.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending; column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[p * n + q].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// Diagonalizes the Hermitian `a` (row-major, `n × n`) in place. On return
/// the diagonal holds the eigenvalues. When `vectors` is given it must start
/// as the identity and ends up holding eigenvectors as columns.
pub(crate) fn jacobi_in_place(a: &mut [Complex64], n: usize, mut vectors: Option<&mut [Complex64]>) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let threshold = OFF_DIAGONAL_TOL * scale;

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(a, n) < threshold {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r < 1e-300 {
                    continue;
                }
                // phase removal: column q *= e^{-iφ}, row q *= e^{iφ}
                let ph = apq / r;
                let ph_c = ph.conj();
                for k in 0..n {
                    a[k * n + q] *= ph_c;
                }
                for k in 0..n {
                    a[q * n + k] *= ph;
                }
                if let Some(v) = vectors.as_deref_mut() {
                    for k in 0..n {
                        v[k * n + q] *= ph_c;
                    }
                }

                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();

                // columns
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * s;
                    a[k * n + q] = akp * s + akq * c;
                }
                // rows
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * s;
                    a[q * n + k] = apk * s + aqk * c;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                if let Some(v) = vectors.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c - vkq * s;
                        v[k * n + q] = vkp * s + vkq * c;
                    }
                }
            }
        }
    }

    let off_norm = off_diagonal_norm(a, n);
    if off_norm < threshold {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_norm,
        })
    }
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the upper triangle's
/// Hermitian part matters in exact arithmetic; callers pass a Hermitian
/// matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    jacobi_in_place(&mut a, n, None)?;
    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension("eigendecomposition of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }
    jacobi_in_place(&mut a, n, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].re.total_cmp(&a[y * n + y].re));
    let values = order.iter().map(|&k| a[k * n + k].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = v[r * n + src];
        }
    }
    Ok(HermitianEigen { values, vectors })
}
