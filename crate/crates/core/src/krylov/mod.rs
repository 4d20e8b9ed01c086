//! Right-preconditioned GMRES and flexible GMRES.
//!
//! Both share one Arnoldi/Givens loop ([`gmres`], [`fgmres`]). The iterate is
//! always reconstructed from the stored preconditioned directions
//! `x_m = x₀ + [z₁ … z_m] y_m`, also for a fixed preconditioner.

mod gmres;

pub use gmres::{arnoldi_step, fgmres, gmres, gmres_inner, gmres_with_state, KrylovState};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    /// `h_{k+1,k} = 0` and the iterate solves the system.
    HappyBreakdown,
    /// `h_{k+1,k} = 0` without a solution (singular systems), or an inner
    /// solver could not deliver the requested accuracy.
    BreakdownWithoutSolution,
    MaxIterations,
}

impl Termination {
    pub fn is_solution(self) -> bool {
        matches!(self, Termination::Converged | Termination::HappyBreakdown)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::HappyBreakdown => "happy-breakdown",
            Termination::BreakdownWithoutSolution => "breakdown",
            Termination::MaxIterations => "max-iterations",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub outer_iterations: usize,
    /// Explicitly recomputed `‖b − A x‖ / ‖b − A x₀‖`.
    pub relative_residual: f64,
    pub termination: Termination,
    /// Inner iterations spent at each outer step.
    pub inner_iteration_counts: Vec<usize>,
    /// `|g_{k+1}| / β` after each outer step, with the initial `1.0` first.
    pub residual_history: Vec<f64>,
    /// Outer step at which `h_{k+1,k}` vanished, if it did.
    pub breakdown_step: Option<usize>,
    /// Outer step at which an inner solver gave up.
    pub inner_failure_step: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmresOptions {
    /// Stop once `‖r_k‖ ≤ tol · ‖r₀‖`.
    pub tol: f64,
    /// Outer iteration limit; `None` means `n`.
    pub maxit: Option<usize>,
    /// Run a second Gram–Schmidt pass at every step.
    pub reorthogonalize: bool,
    /// `h_{k+1,k}` counts as zero when `≤ breakdown_rtol · ‖A P‖`, with
    /// `‖A P‖` estimated from the largest `‖A z_k‖` and `‖A‖_∞ ‖z_k‖` so far.
    pub breakdown_rtol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            maxit: None,
            reorthogonalize: false,
            breakdown_rtol: 1e-14,
        }
    }
}

/// A right preconditioner `z = P v`.
pub trait Preconditioner: Sync {
    /// Applies the fixed operator.
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>>;

    /// Runs inner iterations until `‖v − A z‖ < target`, returning `z` and the
    /// number of inner iterations. Gives up with an inner-failure error after
    /// `cap` iterations.
    fn apply_adaptive(&self, v: &[f64], target: f64, cap: usize) -> Result<(Vec<f64>, usize)>;
}

/// `P = I`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(v.to_vec())
    }

    fn apply_adaptive(&self, v: &[f64], _target: f64, _cap: usize) -> Result<(Vec<f64>, usize)> {
        Ok((v.to_vec(), 1))
    }
}
