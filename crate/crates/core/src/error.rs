use thiserror::Error;

/// Errors raised by the library. Every variant names the invariant it guards.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "matrix is not Hermitian: max |M - M^dagger| = {deviation:.3e} exceeds {tolerance:.3e}"
    )]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid subsystem set: {0}")]
    BadSubset(String),

    #[error("invalid local dimensions: {0}")]
    InvalidDims(String),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("invalid mixture weights: {0}")]
    WeightsInvalid(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("operator is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("operator is not positive semidefinite: minimum eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },

    #[error("wrong shape: {0}")]
    WrongShape(String),

    #[error("no decomposition W = A + B^T2 found after {iterations} iterations (residual {residual:.3e})")]
    Infeasible { iterations: usize, residual: f64 },

    #[error("members {first} and {second} are not orthogonal: |<psi_i|psi_j>| = {overlap:.17}")]
    OrthogonalityViolation {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("product set spans the whole space: {members} members in dimension {total}")]
    SpansSpace { members: usize, total: usize },

    #[error("set is extendible: a product vector with overlap {epsilon:.3e} <= 1e-6 exists")]
    NotUnextendible { epsilon: f64 },

    #[error("product-state optimum not certified: seesaw {seesaw:.9} vs grid {grid:.9}")]
    NotCertified { seesaw: f64, grid: f64 },

    #[error("product set has not been verified (epsilon missing)")]
    Unverified,

    #[error("operator C has max product expectation {c:.3e} <= 1e-12")]
    DegenerateC { c: f64 },

    #[error("operator C has Tr(C rho_UPB) = {overlap:.3e} <= 1e-12; the witness would not detect")]
    NotDetecting { overlap: f64 },

    #[error("witness is negative on a product state: certified minimum {min:.3e}")]
    NotAWitness { min: f64 },

    #[error("unsupported dimensions for this method: {0}")]
    UnsupportedDims(String),
}

impl Error {
    /// Failures of an iterative method rather than of the caller's input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(self, Error::Infeasible { .. } | Error::NotCertified { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
