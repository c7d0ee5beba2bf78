use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid subsystem index {index} for {count} subsystems")]
    InvalidSubsystem { index: usize, count: usize },

    #[error("population ratio R = 1 corresponds to infinite virtual temperature")]
    InfiniteTemperature,

    #[error("steady state is not unique (gap {gap:.3e} below threshold {threshold:.3e})")]
    DegenerateSteadyState { gap: f64, threshold: f64 },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("integrator failure at t = {time}: {reason}")]
    Integrator { time: f64, reason: String },

    #[error("state left the physical set at t = {time}: {reason}")]
    InvariantViolation { time: f64, reason: String },

    #[error("charging threshold not reached before t_max = {t_max}")]
    HorizonTooShort { t_max: f64 },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
