use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:e} exceeds {tol:e}")]
    NotSymmetric { asymmetry: f64, tol: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e} <= {tol:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {n} sites")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("region is empty")]
    EmptyRegion,

    #[error("region covers every site; its complement is empty")]
    FullRegion,

    #[error("eigensolver failed to converge for a {n}x{n} matrix")]
    DecompositionFailure { n: usize },

    #[error("mode vector is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("superposition coefficients are both zero")]
    ZeroSuperposition,

    #[error("phase point is not supported in the region (nonzero entry at site {site})")]
    NotSupportedInRegion { site: usize },

    #[error("Fock dimension {dim} exceeds the cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("operator has no nonzero coefficient")]
    ZeroOperator,

    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
