//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("step rejected: dt={dt:.6e} exceeds stability limit {limit:.6e}")]
    StepRejected { dt: f64, limit: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "fixed point diverged: contraction factor {factor:.6} after {iterations} iterations"
    )]
    FixedPointDiverged { factor: f64, iterations: usize },

    #[error("degenerate ratio: {0}")]
    DegenerateRatio(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("certificate contradiction at t={t:.6}: h={h:.6e} dt={dt:.6e} radius={radius}")]
    CertificateContradiction { t: f64, h: f64, dt: f64, radius: f64 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
