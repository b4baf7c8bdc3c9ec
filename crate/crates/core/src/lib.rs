//! Wavelet filter banks built from matrix functions on the torus.
//!
//! The crate covers the full round trip between the three equivalent
//! descriptions of a compactly supported wavelet system: the polyphase matrix
//! `A(z)`, the subband filters `m₀, …, m_{N−1}`, and the scaling and wavelet
//! functions on the real line.
//!
//! - [`laurent`]: scalar and matrix Laurent polynomials, torus sampling,
//!   unitarity tests and winding numbers.
//! - [`filterbank`]: filters ⇄ polyphase matrices, QMF checks, biorthogonal duals.
//! - [`design`]: projection factorization, Daubechies D4, the two-angle
//!   six-tap family and lifting factorization.
//! - [`operators`]: sequence-domain analysis/synthesis, the pyramid algorithm,
//!   wavelet packets and the big unitary wavelet matrix.
//! - [`transfer`]: transfer and subdivision operators, spectra, and the
//!   periodization diagnostics.
//! - [`cascade`]: cascade iteration, infinite products and moment diagnostics.
//! - [`io`]: CSV and SVG encodings used by the command-line tool.

pub mod cascade;
pub mod design;
pub mod error;
pub mod filterbank;
pub mod io;
pub mod laurent;
pub mod operators;
pub mod transfer;

pub use error::{Error, Result};
pub use filterbank::{BiorthPair, FilterBank};
pub use laurent::{CMat, LaurentPoly, MatLaurentPoly};
pub use num_complex::Complex64;
