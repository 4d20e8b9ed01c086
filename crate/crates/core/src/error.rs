use thiserror::Error;

/// Errors raised by matrix primitives, solvers, analysis and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular factorization: pivot {pivot:.3e} at column {column}")]
    SingularFactorization { column: usize, pivot: f64 },

    #[error("matrix is not symmetric positive definite (failed at column {column})")]
    NotSpd { column: usize },

    #[error("splitting requires a nonzero diagonal (zero at row {row})")]
    ZeroDiagonal { row: usize },

    #[error("non-finite value in the Krylov basis at outer step {step}")]
    NumericalFailure { step: usize },

    #[error(
        "{solver} did not reach relative residual {tol:.1e} within {iterations} iterations (reached {residual:.3e})"
    )]
    InnerFailure {
        solver: &'static str,
        iterations: usize,
        tol: f64,
        residual: f64,
    },

    #[error("dense eigensolver failed to converge")]
    Eigensolve,

    #[error("dense budget exceeded: n = {n} > {budget}")]
    BudgetExceeded { n: usize, budget: usize },

    #[error("matrix is not numerically diagonalizable (eigenvector condition {condition:.3e})")]
    NotDiagonalizable { condition: f64 },

    #[error("index did not stabilize within {dmax} powers (ranks so far {ranks:?})")]
    IndexNotStabilized { dmax: usize, ranks: Vec<usize> },

    #[error("construction check failed: {0}")]
    Construction(String),

    #[error("Matrix Market: {0}")]
    MatrixMarket(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
