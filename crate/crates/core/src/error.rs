use thiserror::Error;

/// Failures raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ensemble: atom count must be at least 1, got {atoms}")]
    InvalidEnsemble { atoms: i64 },

    #[error("invalid state (n={n}, m={m}) for {atoms} atoms")]
    InvalidState { n: i64, m: i64, atoms: usize },

    #[error("ordinal {ordinal} out of range for lattice of dimension {dim}")]
    InvalidOrdinal { ordinal: usize, dim: usize },

    #[error("{what} = {value} is outside its allowed range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("numeric failure in {what}: residual {residual:e} at t = {at}")]
    NumericFailure {
        what: &'static str,
        residual: f64,
        at: f64,
    },

    #[error("g2_{i}{j} undefined: zero intensity on transition {zero}")]
    UndefinedCorrelation { i: u8, j: u8, zero: u8 },

    #[error("chi_{k} undefined: vanishing cross-correlation")]
    UndefinedCsi { k: u8 },

    #[error("oracle supports at most {max} atoms, got {atoms}")]
    SizeLimit { atoms: usize, max: usize },

    #[error("internal consistency check failed for {what}: defect {defect:e}")]
    InternalConsistency { what: String, defect: f64 },

    #[error("stationary state is not unique: null space of dimension {null_dim} (singular values {singular_values:?})")]
    Reducible {
        null_dim: usize,
        singular_values: Vec<f64>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
