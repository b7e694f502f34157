//! Dense complex linear algebra and multipartite index manipulation.

pub mod eigen;
pub mod matrix;
pub mod subsystems;

pub use eigen::{eig_hermitian, eigvals_hermitian, min_eigenvalue, HermitianEigen};
pub use matrix::{inner, kron, kron_vec, vec_norm, ComplexMatrix, MatrixRepr, C64, ONE, ZERO};
pub use subsystems::{
    inverse_permutation, partial_trace, partial_transpose, permute_subsystems, permute_vector,
    HilbertDims,
};

/// Tolerance for positive semidefiniteness: `lambda_min >= -PSD_TOL * (1 + maxabs)`.
pub const PSD_TOL: f64 = 1e-9;

/// Checks `lambda_min(m) >= -1e-9 (1 + maxabs(m))` and returns `lambda_min`.
pub fn is_psd(m: &ComplexMatrix) -> crate::Result<(bool, f64)> {
    let min = min_eigenvalue(m)?;
    Ok((min >= -PSD_TOL * (1.0 + m.max_abs()), min))
}
