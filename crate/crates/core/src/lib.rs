//! Separability toolkit for multipartite mixed states.
//!
//! The crate covers partial-transpose tests across arbitrary cuts,
//! entanglement witnesses and the linear maps they correspond to, witnesses
//! synthesized from unextendible product bases, and extremization of
//! Hermitian forms over product vectors.

pub mod criteria;
pub mod error;
pub mod maps;
pub mod product_opt;
pub mod states;
pub mod tensor;
pub mod upb;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, HilbertDims, C64};
