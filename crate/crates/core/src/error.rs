use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian: ||A - A^H||_F = {violation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { violation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("drift spectrum folds over at level {level}: E[{level}] = {upper} <= E[{prev}] = {lower}")]
    SpectrumFoldOver {
        level: usize,
        prev: usize,
        upper: f64,
        lower: f64,
    },

    #[error(
        "time grid too coarse: dt * omega_max = {product:.3} > pi; use at least {suggested} points"
    )]
    NyquistViolation { product: f64, suggested: usize },

    #[error("no controllable sparse dipole found after {attempts} resamples")]
    NotControllable { attempts: usize },

    #[error("gradient has imaginary residue {0:.3e}; dipole trajectory is not anti-Hermitian")]
    ImaginaryResidue(f64),

    #[error("Hessian kernel asymmetry {0:.3e} after mirroring")]
    AsymmetricKernel(f64),

    #[error("{0} is undefined at a critical point")]
    UndefinedAtCriticalPoint(&'static str),

    #[error("zero {0}")]
    Degenerate(&'static str),

    #[error("optimization produced a non-finite objective after {effort} accepted steps")]
    NonFiniteObjective {
        effort: usize,
        last_good: Box<crate::optimizers::OptimizationRun>,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
