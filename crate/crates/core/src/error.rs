use thiserror::Error;

/// Errors raised by the library.
///
/// Indices stored in the variants are 0-based; the `Display` output uses
/// 1-based agent labels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FjError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("entry ({}, {}) is not finite", .row + 1, .col + 1)]
    NonFinite { row: usize, col: usize },

    #[error("entry ({}, {}) is negative: {value}", .row + 1, .col + 1)]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {} sums to {sum}", .row + 1)]
    RowSumViolation { row: usize, sum: f64 },

    #[error("susceptibility of agent {} is {value}, expected a value in [0, 1]", .index + 1)]
    InvalidSusceptibility { index: usize, value: f64 },

    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),

    #[error("invalid class parameters: {0}")]
    InvalidParams(String),

    #[error("spectral radius did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("model is not Schur stable")]
    NotSchurStable,

    #[error("linear system is singular although the model passed the stability check")]
    SingularSystem,

    #[error("sequence is not a member of the chain class")]
    NotCfjMember,

    #[error("schedule has no periodic tail")]
    NonPeriodicSchedule,

    #[error("schedule has no stage for step {step}")]
    ScheduleExhausted { step: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("trajectory has {len} steps, at least {required} required")]
    TrajectoryTooShort { len: usize, required: usize },
}

pub type Result<T, E = FjError> = std::result::Result<T, E>;
