use thiserror::Error;

/// Errors raised by the basis, dynamics and design layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwarmError {
    #[error("input component {dim} = {value} lies outside [{lower}, {upper}]")]
    OutOfDomain {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("expected {expected} input components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cell index {index:?} is outside the partition (counts {counts:?})")]
    CellOutOfRange {
        index: Vec<usize>,
        counts: Vec<usize>,
    },

    #[error("target function failed to evaluate at {point:?}")]
    TargetEvaluation { point: Vec<f64> },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("swarm program does not cover t = {t}")]
    ScheduleGap { t: f64 },

    #[error("invalid swarm program: {0}")]
    InvalidProgram(String),

    #[error("trace is empty")]
    EmptyTrace,

    #[error("design is infeasible: best achievable bound {best_bound} at q_max exceeds epsilon {epsilon}")]
    Infeasible { best_bound: f64, epsilon: f64 },
}

pub type Result<T, E = SwarmError> = std::result::Result<T, E>;
