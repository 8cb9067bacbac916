//! Command-line pipeline: generate scenarios, simulate the surface models,
//! calibrate the enrichment, propagate its uncertainty and report.

pub mod commands;
pub mod config;

use std::fmt;

use ablation_core::Error;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "ABLATION_WORKERS";

/// Failure categories and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Solver,
    Calibration,
    Io,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Solver => 2,
            FailureKind::Calibration => 3,
            FailureKind::Io => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn solver(m: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Solver,
            message: m.into(),
        }
    }

    pub fn calibration(m: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Calibration,
            message: m.into(),
        }
    }

    pub fn io(m: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Io,
            message: m.into(),
        }
    }

    /// Classifies a library error; `fallback` covers errors that are not
    /// clearly solver or I/O problems.
    pub fn from_core(e: Error, fallback: FailureKind) -> Self {
        let kind = match &e {
            Error::SolverFailure { .. } | Error::TransientFailure(_) | Error::SingularPlaceholder => {
                FailureKind::Solver
            }
            Error::Io(_) | Error::Json(_) | Error::Parse { .. } | Error::Schema { .. } => FailureKind::Io,
            Error::DegenerateSigma(_)
            | Error::RankDeficient { .. }
            | Error::Factorization { .. }
            | Error::InsufficientData { .. } => FailureKind::Calibration,
            _ => fallback,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Worker count from [`WORKERS_ENV`], defaulting to the available cores.
pub fn worker_count() -> Result<usize, Failure> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::io(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
