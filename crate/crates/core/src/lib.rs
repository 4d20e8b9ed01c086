//! GMRES and flexible GMRES preconditioned by stationary inner iterations,
//! aimed at large sparse and possibly singular square systems `Ax = b`.
//!
//! * [`matcore`]: matrices, factorizations, Matrix Market I/O.
//! * [`krylov`]: right-preconditioned GMRES and FGMRES.
//! * [`splittings`]: Jacobi, Gauss–Seidel, SOR, SSOR, GSS, HSS and their
//!   inexact variants, used as inner-iteration preconditioners.
//! * [`analysis`]: semiconvergence, GP/index tests, pseudo spectral radius,
//!   eigenvalue-disk checks and residual bounds.
//! * [`problems`]: Stokes and orthogonally structured saddle-point generators.
//! * [`harness`]: experiment configs, single runs and table reproduction.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod matcore;
pub mod problems;
pub mod splittings;

pub use error::{Error, Result};
