//! Error type shared by all modules.

/// Errors surfaced by state construction, circuit assembly, the photonic
/// device model, and the estimation layer.
///
/// Numeric diagnostics are carried as `f64` regardless of the scalar type the
/// values were computed in.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qudit dimension must be at least 2, got {got}")]
    DimensionTooSmall { got: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("state is not normalized: squared amplitudes sum to {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("cannot normalize a zero state vector")]
    ZeroState,

    #[error("operator fails the unitarity check: max |U*U - I| entry is {max_deviation}")]
    NotUnitary { max_deviation: f64 },

    #[error("invalid probability vector: {reason}")]
    InvalidDistribution { reason: String },

    #[error("projection index {index} out of range for dimension {dim}")]
    ProjectionOutOfRange { index: usize, dim: usize },

    #[error("count row is empty or all zero and cannot be normalized")]
    EmptyCounts,

    #[error("table must be square: {rows} rows but row {row} has width {width}")]
    NotSquare { rows: usize, row: usize, width: usize },

    #[error("invalid photonic geometry: {0}")]
    Geometry(String),

    #[error(
        "sideband truncation {given} is too small: need at least {required} \
         to keep single-pass leakage below {bound:e}"
    )]
    TruncationTooSmall { given: usize, required: usize, bound: f64 },

    #[error("no equalizing modulation index is defined for d = {d}")]
    NoEqualizationPoint { d: usize },

    #[error("bisection bracket [{lo}, {hi}] does not straddle a sign change")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
