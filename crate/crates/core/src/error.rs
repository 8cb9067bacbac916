use thiserror::Error;

use crate::chem::ReactionKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("reaction {id}: expected a {expected:?} reaction, found {actual:?}")]
    KindMismatch {
        id: String,
        expected: ReactionKind,
        actual: ReactionKind,
    },

    #[error("{what} must be positive, got {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid reaction {id}: {reason}")]
    InvalidReaction { id: String, reason: String },

    #[error(
        "no sign change of the site-balance residual on [{lo:e}, {hi:e}]: \
         residual(lo) = {residual_lo:e}, residual(hi) = {residual_hi:e}"
    )]
    SolverFailure {
        lo: f64,
        hi: f64,
        residual_lo: f64,
        residual_hi: f64,
    },

    #[error("transient integration did not reach a steady state: {0}")]
    TransientFailure(String),

    #[error("placeholder adsorption is active but the pseudo-reaction rate is zero")]
    SingularPlaceholder,

    #[error("degenerate mixture: every species density is zero")]
    DegenerateMixture,

    #[error("reference CO flux must be positive to define the likelihood width, got {0:e}")]
    DegenerateSigma(f64),

    #[error("rank-deficient design: column `{column}` is collinear with {others:?}")]
    RankDeficient { column: String, others: Vec<String> },

    #[error("Cholesky factorization failed even with jitter {max_jitter:e}")]
    Factorization { max_jitter: f64 },

    #[error("reference CO flux sums to zero; the flux ratio is undefined")]
    DegenerateQoi,

    #[error("{what} needs at least {needed} entries, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
