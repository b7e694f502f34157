//! Hermitian eigensolver based on cyclic complex Jacobi rotations.
//!
//! Each rotation acts on a pair `(p, q)` and is the product of a diagonal phase
//! (making `a_pq` real) and a real Givens rotation that annihilates it. For the
//! sizes this crate targets (up to 64x64) a handful of sweeps reaches machine
//! precision.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::Result;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `M = U diag(values) U^dagger` with ascending eigenvalues.
/// Column `k` of `vectors` is the eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.col(k)
    }

    /// `U diag(values) U^dagger`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Fails with `NotHermitian` when `max|M - M^dagger|` exceeds
/// `1e-10 * (1 + maxabs(M))`; the anti-Hermitian residue below that threshold
/// is discarded.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    m.require_square("eigensolver input")?;
    m.require_hermitian()?;
    Ok(jacobi(m.hermitian_part()))
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    eig_hermitian(m).map(|e| e.values)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    eig_hermitian(m).map(|e| e.min())
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: ComplexMatrix) -> HermitianEigen {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    HermitianEigen {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]),
    }
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= 1e-18 * scale {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = D G restricted to the (p, q) plane.
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.rows();
    // A <- A U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    // A <- U^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V <- V U
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn diagonal_input_sorted() {
        let e = eig_hermitian(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_eigenvectors_are_complex() {
        let y = ComplexMatrix::new(
            2,
            2,
            vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
        )
        .unwrap();
        let e = eig_hermitian(&y).unwrap();
        assert!(e.reconstruct().max_abs_diff(&y).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_matrix() {
        let e = eig_hermitian(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, ComplexMatrix::identity(3));
    }
}
