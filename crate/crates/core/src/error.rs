use std::path::PathBuf;

use thiserror::Error;

/// Every failure mode the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Choi matrix is not completely positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotCp { min_eigenvalue: f64 },
    #[error("Bloch vector outside the unit ball (norm {norm})")]
    OutOfBall { norm: f64 },
    #[error("invalid Ising parameters: {0}")]
    InvalidParams(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("degenerate transition matrix: {0}")]
    Degenerate(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("transition matrix not achievable (best residual {residual:.3e})")]
    NotAchievable { residual: f64 },
    #[error("causal states coincide; controlled unitary undefined")]
    DegenerateStates,
    #[error("no CZ decomposition found (best residual {residual:.3e})")]
    NoDecomposition { residual: f64 },
    #[error("incomplete data: {0}")]
    IncompleteData(String),
    #[error("ill-conditioned inversion: {0}")]
    IllConditioned(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
