use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{estimate_alpha_grid, log_grid, select_inner_count, spectral_report};
use crate::error::{Error, Result};
use crate::harness::config::{AlphaSource, ExperimentConfig, InnerSteps, SolverKind, SplittingSpec};
use crate::krylov::{fgmres, gmres, gmres_inner, GmresOptions, SolveReport, Termination};
use crate::matcore::vector::norm2;
use crate::matcore::SparseMatrix;
use crate::problems::{SaddleProblem, DENSE_BUDGET};
use crate::splittings::{InnerIteration, Splitting};

/// Machine-readable run outcome; `InnerFailure` is the table's dagger mark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    HappyBreakdown,
    Breakdown,
    InnerFailure,
    MaxIterations,
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::HappyBreakdown => "happy-breakdown",
            Outcome::Breakdown => "breakdown",
            Outcome::InnerFailure => "inner-failure",
            Outcome::MaxIterations => "max-iterations",
            Outcome::Error => "error",
        }
    }

    fn of(rep: &SolveReport) -> Self {
        match rep.termination {
            Termination::Converged => Outcome::Converged,
            Termination::HappyBreakdown => Outcome::HappyBreakdown,
            Termination::BreakdownWithoutSolution if rep.inner_failure_step.is_some() => Outcome::InnerFailure,
            Termination::BreakdownWithoutSolution => Outcome::Breakdown,
            Termination::MaxIterations => Outcome::MaxIterations,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRecord {
    /// Row label such as `GSS` or `HSS′`.
    pub label: String,
    /// Parameter block within a table (`alpha_exp`, `alpha_H`), empty otherwise.
    pub block: String,
    /// Grid size `q` of the problem.
    pub size: usize,
    pub problem: String,
    pub n: usize,
    pub solver: SolverKind,
    pub splitting: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `ν(H)` when it was computed.
    pub nu: Option<f64>,
    pub ell: Option<usize>,
    pub outer_iterations: usize,
    pub inner_iterations_total: usize,
    pub inner_counts: Vec<usize>,
    pub outcome: Outcome,
    pub breakdown_step: Option<usize>,
    pub inner_failure_step: Option<usize>,
    /// As reported by the solver.
    pub final_relative_residual: f64,
    /// Recomputed from the returned iterate through an independent product.
    pub verified_relative_residual: f64,
    pub residual_history: Vec<f64>,
    pub setup_time: f64,
    pub solve_time: f64,
    pub error: Option<String>,
    pub config: Option<ExperimentConfig>,
}

impl ExperimentRecord {
    pub fn converged(&self) -> bool {
        matches!(self.outcome, Outcome::Converged | Outcome::HappyBreakdown)
    }
}

/// `‖b − A x‖ / ‖b‖` accumulated entry by entry from the stored triplets,
/// bypassing the CSR product used by the solvers.
pub fn independent_residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let mut r = b.to_vec();
    for (i, j, v) in a.iter() {
        r[i] -= v * x[j];
    }
    let bn = norm2(b);
    if bn == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / bn
    }
}

/// A fully resolved method for [`execute`].
pub struct Method<'a> {
    pub solver: SolverKind,
    pub splitting: Option<&'a Splitting>,
    pub ell: usize,
    pub inner_cap: Option<usize>,
}

/// One solve from `x₀ = 0`; returns the report and the solve time in seconds.
pub fn execute(problem: &SaddleProblem, m: &Method<'_>, opts: &GmresOptions) -> Result<(SolveReport, f64)> {
    let start = Instant::now();
    let n = problem.n();
    let rep = match (m.solver, m.splitting) {
        (SolverKind::Gmres, _) => gmres(&problem.a, &problem.b, None, None, opts)?,
        (SolverKind::GmresInner, Some(s)) => gmres_inner(&problem.a, &problem.b, s, m.ell, None, opts)?,
        (SolverKind::Fgmres, Some(s)) => {
            let p = InnerIteration::adaptive(s);
            fgmres(&problem.a, &problem.b, &p, None, opts, m.inner_cap.unwrap_or(n))?
        }
        (_, None) => return Err(Error::Config(format!("{} needs a splitting", m.solver.as_str()))),
    };
    Ok((rep, start.elapsed().as_secs_f64()))
}

/// Turns a solve into a record (labels are filled in by the caller).
pub fn make_record(
    problem: &SaddleProblem,
    m: &Method<'_>,
    rep: &SolveReport,
    setup: f64,
    solve: f64,
) -> ExperimentRecord {
    let kind = m.splitting.map(|s| s.kind());
    let beta = match kind {
        Some(
            crate::splittings::SplittingKind::Gss { beta, .. } | crate::splittings::SplittingKind::Igss { beta, .. },
        ) => Some(beta),
        _ => None,
    };
    ExperimentRecord {
        label: String::new(),
        block: String::new(),
        size: problem.meta.q,
        problem: problem.describe(),
        n: problem.n(),
        solver: m.solver,
        splitting: kind.map(|k| k.label().to_string()),
        alpha: kind.and_then(|k| k.alpha()),
        beta,
        nu: None,
        ell: (m.solver == SolverKind::GmresInner).then_some(m.ell),
        outer_iterations: rep.outer_iterations,
        inner_iterations_total: rep.inner_iteration_counts.iter().sum(),
        inner_counts: rep.inner_iteration_counts.clone(),
        outcome: Outcome::of(rep),
        breakdown_step: rep.breakdown_step,
        inner_failure_step: rep.inner_failure_step,
        final_relative_residual: rep.relative_residual,
        verified_relative_residual: independent_residual(&problem.a, &problem.b, &rep.x),
        residual_history: rep.residual_history.clone(),
        setup_time: setup,
        solve_time: solve,
        error: None,
        config: None,
    }
}

/// Placeholder record for a run that could not be carried out.
pub fn error_record(problem: &SaddleProblem, solver: SolverKind, err: &Error) -> ExperimentRecord {
    ExperimentRecord {
        label: String::new(),
        block: String::new(),
        size: problem.meta.q,
        problem: problem.describe(),
        n: problem.n(),
        solver,
        splitting: None,
        alpha: None,
        beta: None,
        nu: None,
        ell: None,
        outer_iterations: 0,
        inner_iterations_total: 0,
        inner_counts: Vec::new(),
        outcome: Outcome::Error,
        breakdown_step: None,
        inner_failure_step: None,
        final_relative_residual: f64::NAN,
        verified_relative_residual: f64::NAN,
        residual_history: Vec::new(),
        setup_time: 0.0,
        solve_time: 0.0,
        error: Some(err.to_string()),
        config: None,
    }
}

/// Writes `k,relative_residual,inner_count` lines; step 0 has no inner count.
pub fn write_trace(path: &Path, history: &[f64], inner_counts: &[usize]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "relative_residual", "inner_count"])?;
    for (k, r) in history.iter().enumerate() {
        let inner = k
            .checked_sub(1)
            .and_then(|i| inner_counts.get(i))
            .map(|c| c.to_string())
            .unwrap_or_default();
        w.write_record([k.to_string(), format!("{r:e}"), inner])?;
    }
    w.flush()?;
    Ok(())
}

/// Resolves `α` for a splitting spec (explicit or grid search); returns the
/// spec with `alpha` set and `ν` if it was computed.
pub fn resolve_alpha(
    problem: &SaddleProblem,
    spec: &SplittingSpec,
    source: AlphaSource,
) -> Result<(SplittingSpec, Option<f64>)> {
    match source {
        AlphaSource::Explicit => Ok((spec.clone(), None)),
        AlphaSource::GridSearch { lo_exp, hi_exp, points } => {
            if !spec.needs_alpha() {
                return Ok((spec.clone(), None));
            }
            let probe = SplittingSpec {
                name: spec.exact_counterpart(),
                ..spec.clone()
            }
            .with_alpha(1.0)
            .resolve(problem)?;
            let sweep = estimate_alpha_grid(problem, probe, &log_grid(lo_exp, hi_exp, points))?;
            Ok((spec.clone().with_alpha(sweep.alpha_best), Some(sweep.nu_best)))
        }
    }
}

/// Generates the problem, builds the method and runs one solve.
pub fn run_single(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let problem = cfg.problem.build(cfg.seed)?;
    run_on(&problem, cfg)
}

/// [`run_single`] on an already generated problem.
pub fn run_on(problem: &SaddleProblem, cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    let n = problem.n();
    let opts = GmresOptions {
        tol: cfg.tol,
        maxit: cfg.maxit,
        reorthogonalize: cfg.reorthogonalize,
        ..Default::default()
    };
    let setup_start = Instant::now();
    let mut nu = None;
    let splitting = match (&cfg.method.splitting, cfg.method.solver) {
        (_, SolverKind::Gmres) => None,
        (None, s) => return Err(Error::Config(format!("{} needs a splitting", s.as_str()))),
        (Some(spec), _) => {
            let (spec, found_nu) = resolve_alpha(problem, spec, cfg.method.alpha_source)?;
            nu = found_nu;
            Some(Splitting::from_kind(
                &problem.a,
                problem.blocks.saddle(),
                spec.resolve(problem)?,
            )?)
        }
    };
    let ell = match (cfg.method.inner_steps, &splitting) {
        (InnerSteps::Fixed { ell }, _) => ell,
        (InnerSteps::Select { cap, tol }, Some(s)) => select_inner_count(s, &problem.b, cap, tol)?.ell,
        (InnerSteps::Select { .. }, None) => 1,
    };
    if nu.is_none() && n <= DENSE_BUDGET.min(400) {
        // Cheap enough to report alongside the run.
        if let Some(s) = splitting.as_ref().filter(|s| s.is_exact()) {
            nu = spectral_report(&s.iteration_matrix()?, 1e-8).ok().map(|r| r.nu);
        }
    }
    let setup = setup_start.elapsed().as_secs_f64();
    let method = Method {
        solver: cfg.method.solver,
        splitting: splitting.as_ref(),
        ell,
        inner_cap: cfg.method.inner_cap,
    };
    let (rep, solve) = execute(problem, &method, &opts)?;
    let mut rec = make_record(problem, &method, &rep, setup, solve);
    rec.label = label_for(cfg);
    rec.nu = nu;
    rec.config = Some(cfg.clone());
    if let Some(path) = &cfg.trace {
        write_trace(path, &rep.residual_history, &rep.inner_iteration_counts)?;
    }
    Ok(rec)
}

fn label_for(cfg: &ExperimentConfig) -> String {
    let name = cfg
        .method
        .splitting
        .as_ref()
        .map(|s| s.name.as_str().to_uppercase())
        .unwrap_or_default();
    match cfg.method.solver {
        SolverKind::Gmres => "GMRES".into(),
        SolverKind::GmresInner => name,
        SolverKind::Fgmres => format!("F-{name}"),
    }
}
