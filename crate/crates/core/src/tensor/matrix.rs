use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance for Hermiticity checks: `max|M - M^dagger| <= HERMITIAN_TOL * (1 + maxabs(M))`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Interchange form: real and imaginary parts as separate row-major arrays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.re.len() != r.im.len() {
            return Err(Error::DimensionMismatch(format!(
                "re has {} entries but im has {}",
                r.re.len(),
                r.im.len()
            )));
        }
        let data =
            r.re.into_iter()
                .zip(r.im)
                .map(|(a, b)| C64::new(a, b))
                .collect();
        ComplexMatrix::new(r.rows, r.cols, data)
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from real-valued rows, mostly useful in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Column vector.
    pub fn column(v: &[C64]) -> Self {
        ComplexMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|u><v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|v><v|`
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what} must be square, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `<v|M|v>` without normalization.
    pub fn expectation(&self, v: &[C64]) -> Result<C64> {
        let mv = self.apply(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> ComplexMatrix {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product `Tr(A^dagger B)`.
    pub fn hs_inner(&self, other: &ComplexMatrix) -> Result<C64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "Tr(AB) needs compatible shapes, got {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn hermitian_tolerance(&self) -> f64 {
        HERMITIAN_TOL * (1.0 + self.max_abs())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= self.hermitian_tolerance()
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        let tolerance = self.hermitian_tolerance();
        if deviation <= tolerance {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation,
                tolerance,
            })
        }
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> ComplexMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        kron(self, other)
    }

    fn check_same_shape(&self, other: &ComplexMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "shapes differ: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> ComplexMatrix {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                let row = ai * b.rows + bi;
                let base = row * cols + aj * b.cols;
                for bj in 0..b.cols {
                    data[base + bj] = x * b[(bi, bj)];
                }
            }
        }
    }
    ComplexMatrix { rows, cols, data }
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<u|v>`
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn sigma_x_pair_flips_basis_state() {
        let xx = kron(&pauli_x(), &pauli_x());
        let ket00 = [ONE, ZERO, ZERO, ZERO];
        let out = xx.apply(&ket00).unwrap();
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn kron_shape_and_placement() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[1.0], &[10.0]]).unwrap();
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (2, 2));
        assert_eq!(k[(1, 1)], C64::new(20.0, 0.0));
        assert_eq!(k[(0, 1)], C64::new(2.0, 0.0));
    }

    #[test]
    fn new_rejects_wrong_entry_count() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ZERO; 3]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn hermiticity_is_relative_to_scale() {
        let mut m = ComplexMatrix::identity(2).scale_real(1e6);
        m[(0, 1)] = C64::new(1e-5, 0.0);
        assert!(m.is_hermitian());
        m[(0, 1)] = C64::new(1e-3, 0.0);
        assert!(matches!(
            m.require_hermitian(),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_product_matches_explicit_product() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 0.5));
        let direct = (&a * &b).trace();
        assert!((a.trace_product(&b).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn serde_repr_roundtrip_is_bit_exact() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| {
            C64::new(0.1 * i as f64, 1.0 / (j as f64 + 3.0))
        });
        let repr: MatrixRepr = m.clone().into();
        let back = ComplexMatrix::try_from(repr).unwrap();
        assert_eq!(m, back);
    }
}
