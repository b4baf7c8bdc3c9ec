use thiserror::Error;

use crate::laurent::{LaurentPoly, MatLaurentPoly};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operand: {0}")]
    InvalidOperand(String),

    #[error("invalid input: {0}")]
    Validation(String),

    /// A polynomial (or determinant) comes within `min_modulus` of zero on the torus grid.
    #[error("function is singular on the torus (min modulus {min_modulus:.3e})")]
    SingularOnTorus { min_modulus: f64 },

    #[error("determinant {det} is not a monomial, so the inverse is not a Laurent polynomial")]
    NonPolynomialInverse { det: LaurentPoly },

    #[error(
        "not a rank-one projection: |P^2 - P| = {idempotence:.3e}, |P - P*| = {self_adjoint:.3e}, |tr P - 1| = {trace:.3e}"
    )]
    NotAProjection {
        idempotence: f64,
        self_adjoint: f64,
        trace: f64,
    },

    #[error("determinant is not identically 1 (coefficient residual {residual:.3e})")]
    DeterminantNotOne { residual: f64 },

    #[error("lifting factorization stalled: {reason}")]
    FactorizationFailed {
        reason: String,
        residual: Box<MatLaurentPoly>,
    },

    #[error("mode window too small: need band_m >= {required}, got {given}")]
    BandTooSmall { required: usize, given: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("expected position is undefined for the zero function")]
    ZeroFunction,

    #[error("invalid packet partition: overlapping indices {overlapping:?}, missing indices {missing:?}")]
    InvalidPartition {
        overlapping: Vec<usize>,
        missing: Vec<usize>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
