//! Exact linear algebra over the rationals plus a high-precision floating
//! companion for symmetric inverse square roots.

pub mod bigfloat;
mod fmatrix;
mod nullspace;
mod qmatrix;
mod sturm;

pub use bigfloat::BigFloat;
pub use fmatrix::{inv_sqrt_sym, FMatrix};
pub use nullspace::nullspace;
pub use qmatrix::{positive_definite, QMatrix};
pub use sturm::{sturm_positive_roots, UPoly};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("rows have different lengths")]
    RaggedRows,
    #[error("zero polynomial has no root count")]
    ZeroPolynomial,
}
