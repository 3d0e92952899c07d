use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("permanent of a {0}x{0} matrix exceeds the supported size of 12")]
    PermanentTooLarge(usize),
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("reflectivity {0} outside [0, 1]")]
    Reflectivity(f64),
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },
    #[error("beamsplitter ports must differ (both are mode {0})")]
    SameMode(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("gram matrix is not a valid overlap matrix: {0}")]
    InvalidGram(&'static str),
    #[error("internal label {0} has no row in the gram matrix")]
    UnknownLabel(usize),
    #[error("unsupported configuration: {0}")]
    Unsupported(&'static str),
    #[error("invalid detection pattern: {0}")]
    InvalidPattern(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("overlap table is empty")]
    EmptyOverlapTable,
    #[error("no uncorrelated signal to normalize against")]
    NoUncorrelatedSignal,
    #[error("not enough side peaks: need {needed}, have {have}")]
    InsufficientSidePeaks { needed: usize, have: usize },
    #[error("truth-table row {0} is all zero; overlap undefined")]
    ZeroRow(usize),
    #[error("all correlation areas are zero; E undefined")]
    ZeroCorrelation,
    #[error("fidelity {0} is outside the model range [0.25, 1]")]
    FidelityOutOfModel(f64),
    #[error("overlap {0} is outside the model range [2/3, 1]")]
    OverlapOutOfModel(f64),
}
