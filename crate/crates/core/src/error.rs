use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigendecomposition did not converge within {iterations} iterations")]
    EighNoConvergence { iterations: usize },

    #[error("basis is not orthonormal (Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { what: String, min_eigenvalue: f64 },

    #[error("Schur matrix diagonal must be all ones (entry {index} is {value})")]
    NonUnitDiagonal { index: usize, value: String },

    #[error("channel is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("POVM effects do not sum to identity (deviation {deviation:.3e})")]
    PovmNotNormalized { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("MUB construction supported only for prime d (got d = {0})")]
    UnsupportedMubDimension(usize),

    #[error("oracle budget exceeded: joint matrix dimension {required_dim} needs cost {cost}, budget is {budget}")]
    BudgetExceeded {
        required_dim: usize,
        cost: usize,
        budget: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid channel spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
