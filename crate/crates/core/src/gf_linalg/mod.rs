//! Exact linear algebra over prime fields.

mod field;
mod matrix;
mod subspace;

pub use field::PrimeField;
pub use matrix::{FieldMatrix, Rref};
pub use subspace::{column_basis, extend_basis, in_span, intersect_column_spaces, solve};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field modulus {0} outside [2, 65536)")]
    ModulusOutOfRange(u64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrices over different fields: GF({0}) and GF({1})")]
    FieldMismatch(u32, u32),
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("inner span is not contained in outer span")]
    NotNested,
}
