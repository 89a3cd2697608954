use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("matrix must be square and nonempty")]
    NotSquare,

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("spectrum is degenerate; supply a completing family instead")]
    DegenerateSpectrum,

    #[error("family members {i} and {j} do not commute")]
    NonCommutingFamily { i: usize, j: usize },

    #[error("family does not generate a maximal commutative subalgebra")]
    NonMaximalFamily,

    #[error("not a partition of identity into rank-1 projectors: {reason}")]
    InvalidFrame { reason: String },

    #[error("device `{label}` is not compatible with the observable")]
    IncompatibleDevice { label: String },

    #[error("physical state has no assignment for this context and extension is disabled")]
    MissingAssignment,

    #[error("selector returned {index}, allowed outcomes {allowed:?}")]
    SelectorOutOfRange { index: usize, allowed: Vec<usize> },

    #[error("context list must be nonempty")]
    EmptyContexts,

    #[error("no recorded value for the observable under device `{label}`")]
    MissingDeviceValue { label: String },

    #[error("not a one-dimensional projector (trace {trace:.6}, residual {residual:.3e})")]
    NotRankOneProjector { trace: f64, residual: f64 },

    #[error("not a valid state functional: {reason}")]
    InvalidState { reason: String },

    #[error("quadrature step {step:.3e} exceeds the stability bound {bound:.3e}")]
    StepTooLarge { step: f64, bound: f64 },

    #[error("not a ground physical state: value of the ground projector is {value:.6}, expected 1")]
    NotGroundState { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
