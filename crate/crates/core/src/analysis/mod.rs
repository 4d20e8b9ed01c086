//! Spectral and structural analysis: semiconvergence of iteration matrices,
//! GP/index tests, the eigenvalue disk of `A·C^(ℓ)`, the residual bound,
//! `α` sweeps, inner-count selection and index-`d` test fixtures.
//!
//! Everything here is dense and limited to the dense budget.

mod disk;
mod fixture;
mod spectral;
mod tuning;

pub use disk::{
    bound_evaluate, disk_check, disk_check_with, BoundReport, DiskReport, RadiusChoice, MAX_EIGVEC_CONDITION,
};
pub use fixture::{appendix_fixture, AppendixFixture};
pub use spectral::{
    gp_test, index_of, index_of_with, spectral_report, spectral_report_with, IndexReport, SpectralOptions,
    SpectralReport,
};
pub use tuning::{estimate_alpha_grid, log_grid, select_inner_count, AlphaPoint, AlphaSweep, InnerCountChoice};
