//! Command implementations behind the `lamom` binary.
//!
//! Every command returns either printable output or a [`CliError`] whose
//! [`exit_code`](CliError::exit_code) the binary passes to the shell.

pub mod commands;
pub mod family;
pub mod output;

use lamom::linalg::{MatrixError, DEFAULT_DIM_LIMIT};
use lamom::maps::MapError;
use lamom::measurement::MeasurementError;
use lamom::moments::MomentError;
use lamom::states::StateError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable overriding the multi-copy operator size cap.
pub const DIM_LIMIT_VAR: &str = "LAMOM_DIM_LIMIT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => EXIT_INPUT,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::NoConvergence => Self::Numerical(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Matrix(m) => m.into(),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::Map(m) => m.into(),
            MomentError::Matrix(m) => m.into(),
            MomentError::OrderTooLarge { .. } | MomentError::Q2OutOfRange(_) => {
                Self::Input(e.to_string())
            }
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<MeasurementError> for CliError {
    fn from(e: MeasurementError) -> Self {
        match e {
            MeasurementError::Map(m) => m.into(),
            MeasurementError::Matrix(m) => m.into(),
            MeasurementError::ProbabilityDefect { .. } => Self::Numerical(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

/// Size cap for multi-copy operators, from the environment if set.
pub fn dim_limit() -> Result<usize, CliError> {
    match std::env::var(DIM_LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                CliError::Input(format!("{DIM_LIMIT_VAR}={v:?} is not a positive integer"))
            }),
        Err(_) => Ok(DEFAULT_DIM_LIMIT),
    }
}
