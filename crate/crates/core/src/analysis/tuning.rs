use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::spectral::{spectral_report_with, SpectralOptions};
use crate::error::{Error, Result};
use crate::problems::SaddleProblem;
use crate::splittings::{Splitting, SplittingKind};

#[derive(Clone, Debug, Serialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub nu: Option<f64>,
    pub rho: Option<f64>,
    /// Why the point was skipped, if it was.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaSweep {
    pub alpha_best: f64,
    pub nu_best: f64,
    /// One entry per grid point, in grid order.
    pub table: Vec<AlphaPoint>,
}

/// `points` values `10^e` with `e` evenly spaced over `[lo_exp, hi_exp]`.
pub fn log_grid(lo_exp: f64, hi_exp: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..points)
            .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// Grid search for the `α` minimizing `ν(H(α))` of an exact splitting family.
/// Ties go to the earlier grid point; failed points are recorded and skipped.
pub fn estimate_alpha_grid(problem: &SaddleProblem, kind: SplittingKind, grid: &[f64]) -> Result<AlphaSweep> {
    if kind.alpha().is_none() || !kind.is_exact() {
        return Err(Error::InvalidArgument(format!(
            "α sweep needs an exact shifted splitting, got {}",
            kind.label()
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty α grid".into()));
    }
    let opts = SpectralOptions::default();
    if problem.n() > opts.budget {
        return Err(Error::BudgetExceeded {
            n: problem.n(),
            budget: opts.budget,
        });
    }
    let table: Vec<AlphaPoint> = grid
        .par_iter()
        .map(|&alpha| {
            let eval = || -> Result<(f64, f64)> {
                let s = Splitting::from_kind(&problem.a, problem.blocks.saddle(), kind.with_alpha(alpha))?;
                let rep = spectral_report_with(&s.iteration_matrix()?, &opts)?;
                Ok((rep.nu, rep.rho))
            };
            match eval() {
                Ok((nu, rho)) => AlphaPoint {
                    alpha,
                    nu: Some(nu),
                    rho: Some(rho),
                    error: None,
                },
                Err(e) => AlphaPoint {
                    alpha,
                    nu: None,
                    rho: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let best =
        table
            .iter()
            .filter_map(|p| p.nu.map(|nu| (p.alpha, nu)))
            .fold(None, |acc: Option<(f64, f64)>, (a, nu)| match acc {
                Some((_, bnu)) if bnu <= nu => acc,
                _ => Some((a, nu)),
            });
    let (alpha_best, nu_best) = best.ok_or_else(|| Error::InvalidArgument("every α grid point failed".into()))?;
    Ok(AlphaSweep {
        alpha_best,
        nu_best,
        table,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerCountChoice {
    pub ell: usize,
    /// Steps the stationary iteration needed to meet the criterion, if it did
    /// within `n` steps.
    pub steps_needed: Option<usize>,
    /// Set when the criterion was never met (`ell` is then the cap).
    pub not_met: bool,
}

/// Number of inner steps `ℓ`: the smaller of `cap` and the first `i` with
/// `‖z⁽ⁱ⁻¹⁾ − z⁽ⁱ⁾‖ < tol ‖z⁽ⁱ⁾‖` for the stationary iteration on `A z = b`
/// from `z⁽⁰⁾ = 0`. Since `z⁽⁰⁾ = 0`, the earliest possible `i` is 2.
pub fn select_inner_count(s: &Splitting, b: &[f64], cap: usize, tol: f64) -> Result<InnerCountChoice> {
    if !s.is_exact() {
        return Err(Error::InvalidArgument(
            "inner count selection needs an exact splitting".into(),
        ));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be at least 1".into()));
    }
    let n = s.dim();
    let mut z = vec![0.0; n];
    for i in 1..=n.max(1) {
        let run = s.stationary_run(b, &z, 1)?;
        z = run.z;
        if run.relative_change < tol {
            return Ok(InnerCountChoice {
                ell: i.min(cap),
                steps_needed: Some(i),
                not_met: false,
            });
        }
    }
    log::warn!("inner count criterion not met within {n} steps; using cap {cap}");
    Ok(InnerCountChoice {
        ell: cap,
        steps_needed: None,
        not_met: true,
    })
}
