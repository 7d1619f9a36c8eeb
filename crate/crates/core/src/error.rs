use thiserror::Error;

/// Errors produced by solvers, checkers, and report builders.
#[derive(Debug, Error)]
pub enum Error {
    /// An evaluation point left the validity interval of a velocity model.
    #[error("value {value} outside the validity interval [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    /// An operation specific to one kernel family was called on the other.
    #[error("operation requires the {required} kernel")]
    KernelMismatch { required: &'static str },

    /// A moving-mesh cell width became non-positive; the time step was too large.
    #[error("cell {index} collapsed (width {width:e}) near t = {time}")]
    CellCollapse { index: usize, width: f64, time: f64 },

    /// A bound was requested whose hypothesis was not verified on the data range.
    #[error("missing hypothesis: {needed}")]
    MissingAssumption { needed: &'static str },

    /// The flux is not strictly concave between the given states.
    #[error("flux not strictly concave between {a} and {b}")]
    NonConcave { a: f64, b: f64 },

    /// A decay-rate fit has no usable data (zero errors or too few points).
    #[error("degenerate decay fit: {reason}")]
    DegenerateFit { reason: &'static str },

    /// Invalid construction arguments (profiles, grids, configurations).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The time loop exceeded its safety iteration budget.
    #[error("step limit exceeded near t = {time}")]
    StepLimit { time: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
