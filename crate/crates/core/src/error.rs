use thiserror::Error;

use crate::conditions::ConditionReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("index {index} out of range (must be < {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("not a density operator: {0}")]
    InvalidDensity(String),

    #[error("channel has no Kraus operators")]
    EmptyChannel,

    #[error("Kraus operators have inconsistent shapes")]
    RaggedOperators,

    #[error("Kraus operators are not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel is not correctable (max residual {:.3e})", .0.max_residual)]
    NotCorrectable(Box<ConditionReport>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
