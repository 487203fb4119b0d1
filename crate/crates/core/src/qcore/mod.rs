//! Exact dense complex linear algebra over small composite Hilbert spaces.
//!
//! Every space handled here is a tensor product of a few subsystems
//! (two qubits, an observer register, occasionally a probe register), so the
//! largest vector is on the order of a thousand amplitudes and everything is
//! stored densely, row-major, with subsystem 0 as the most significant digit
//! of the flat index.

mod density;
mod layout;
mod operator;
mod rng;
mod state;

use thiserror::Error;

pub use density::{partial_trace, DensityMatrix};
pub use operator::{Operator, ProjectiveMeasurement};
pub use rng::RandomStream;
pub use state::{apply, born_sample, inner, tensor, StateVector};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Tolerance for algebraic identities (normalization, unitarity, hermiticity).
pub const ALG_TOL: f64 = 1e-12;

/// Floor below which an eigenvalue counts as negative.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("subsystem dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("state has norm {0}, expected 1")]
    NotNormalized(f64),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("invalid subsystem indices {0:?}")]
    InvalidTargets(Vec<usize>),

    #[error("operator is not unitary")]
    NotUnitary,

    #[error("projectors do not form a complete orthogonal set")]
    IncompleteProjectors,

    #[error("density matrix invalid: {0}")]
    InvalidDensity(String),
}

pub type QResult<T> = Result<T, QError>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
