//! Command-line front end: coin files, classification, simulation and the
//! built-in example registry.

pub mod commands;
pub mod report;
pub mod spec_file;

use std::fmt;

use oqw_core::OqwError;

/// Process exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Numeric = 1,
    Structural = 2,
    NoCriterion = 3,
    Budget = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn structural(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Structural,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<OqwError> for CliError {
    fn from(e: OqwError) -> Self {
        let status = match &e {
            OqwError::DimensionMismatch { .. }
            | OqwError::NotSquare { .. }
            | OqwError::Empty
            | OqwError::InvalidArgument(_) => ExitStatus::Structural,
            OqwError::CriterionUnavailable(_) | OqwError::TrivialCoin { .. } => ExitStatus::NoCriterion,
            OqwError::BudgetExceeded { .. } => ExitStatus::Budget,
            OqwError::NotHermitian { .. }
            | OqwError::InvalidDensity(_)
            | OqwError::InvalidCoin { .. }
            | OqwError::NoConvergence { .. }
            | OqwError::NotErgodic
            | OqwError::CoinDefect(_) => ExitStatus::Numeric,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

/// Text to print on stdout together with the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub status: ExitStatus,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Self {
            stdout,
            status: ExitStatus::Ok,
        }
    }
}
