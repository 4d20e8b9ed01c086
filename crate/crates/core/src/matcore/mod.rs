//! Dense and sparse real matrices, factorizations, structured constructors and
//! Matrix Market I/O.

pub mod build;
pub mod dense;
pub mod factor;
pub mod givens;
pub mod linalg;
pub mod mtx;
pub mod sparse;
pub mod vector;

pub use build::{block, direct_sum, kron, kron_sum, tridiag, vstack};
pub use dense::DenseMatrix;
pub use factor::{chol_factor, fact_solve, lu_factor, FactorKind, Factorization};
pub use givens::random_givens_orthogonal;
pub use sparse::SparseMatrix;

use crate::error::Result;

/// Anything that can compute `y = A x`.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Cheap estimate of `‖A‖` (used for relative zero tests); `0` if unknown.
    fn norm_estimate(&self) -> f64 {
        0.0
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matvec(x)
    }
    fn norm_estimate(&self) -> f64 {
        self.norm_inf()
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matvec(x)
    }
    fn norm_estimate(&self) -> f64 {
        self.norm_inf()
    }
}
