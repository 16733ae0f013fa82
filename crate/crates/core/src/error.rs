use thiserror::Error;

use crate::cluster::StabilityClass;

/// Errors produced by the reduction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular or not square: {0}")]
    SingularMatrix(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("subspace dimension {k} out of range [-1, {n}]")]
    DimensionOutOfRange { k: i64, n: usize },

    #[error("cluster is not stable")]
    NotStable(Box<StabilityClass>),

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    Convergence {
        iterations: usize,
        gradient_norm: f64,
        best: Option<Box<crate::covariant::HermitianForm>>,
    },

    #[error("points are not in general position: {0}")]
    DegeneratePosition(String),

    #[error("polynomial is not homogeneous")]
    NonHomogeneous,

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("elimination is inconclusive: both leading coefficients vanish; apply a linear change of variables")]
    InconclusiveElimination,

    #[error("curves share a common component")]
    CommonComponent,

    #[error("ambiguous fibre during back-substitution: {0}")]
    FiberAmbiguity(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("cluster is not fixed by complex conjugation; use the complex covariant only")]
    NotReal,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotStable(_) => 2,
            Error::Convergence { .. } | Error::RootFinding(_) | Error::FiberAmbiguity(_) => 3,
            Error::Parse(_) | Error::InvalidPoint(_) | Error::DimensionMismatch { .. } => 4,
            _ => 1,
        }
    }
}
