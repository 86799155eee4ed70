use thiserror::Error;

/// Errors produced by grid construction, solvers and optimizers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("empty mask")]
    EmptyMask,

    #[error("linear solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("enumeration too large: C(n, k) = {combinations} exceeds cap {cap}")]
    EnumerationCap { combinations: u128, cap: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
