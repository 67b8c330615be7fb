use thiserror::Error;

/// Errors raised by operator construction, network composition and evolution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |h - h^dagger| = {0:e}")]
    NonHermitian(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index ({m}, {n}) out of range for register dimension {dim}")]
    IndexOutOfRange { m: usize, n: usize, dim: usize },

    #[error("zero vector has no defined overlap")]
    ZeroVector,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("grid of size {size} is degenerate for the {operator} stencil (needs N >= {min})")]
    DegenerateGrid {
        size: usize,
        min: usize,
        operator: &'static str,
    },

    #[error("mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),

    #[error("frequency must be positive and finite, got {0}")]
    NonPositiveFrequency(f64),

    #[error("the two particle grids differ")]
    GridMismatch,

    #[error("antisymmetrization annihilated the state")]
    ZeroResult,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid time step {0}")]
    InvalidTimeStep(f64),

    #[error("invalid total time {0}")]
    InvalidTotalTime(f64),

    #[error(
        "total time {total_time} is not a whole number of steps of dt = {dt} \
         (residual {residual:e}); the residual-step rule requires |T - steps*dt| <= 1e-9*dt"
    )]
    ResidualStep {
        total_time: f64,
        dt: f64,
        residual: f64,
    },

    #[error("cannot compose an empty list of networks")]
    EmptyComposition,

    #[error("the whole network needs at least one step")]
    NoSteps,

    #[error("inconsistent network dump: {0}")]
    InvalidDump(String),
}

pub type Result<T> = std::result::Result<T, Error>;
