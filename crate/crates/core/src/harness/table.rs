use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{estimate_alpha_grid, log_grid, select_inner_count, spectral_report};
use crate::error::{Error, Result};
use crate::harness::config::{SolverKind, DEFAULT_INNER_TOL};
use crate::harness::run::{error_record, execute, make_record, write_trace, ExperimentRecord, Method, Outcome};
use crate::krylov::GmresOptions;
use crate::problems::{stokes_generate, structured_generate, SaddleProblem, DEFAULT_DENSITY};
use crate::splittings::{gss_default_beta, Splitting, SplittingKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableId {
    StokesMu1,
    StokesMu1e5,
    StructJ3,
    StructJ6,
    StructJ9,
    ParamsJ3,
    ParamsJ6,
    ParamsJ9,
}

impl TableId {
    pub const ALL: [TableId; 8] = [
        TableId::StokesMu1,
        TableId::StokesMu1e5,
        TableId::StructJ3,
        TableId::StructJ6,
        TableId::StructJ9,
        TableId::ParamsJ3,
        TableId::ParamsJ6,
        TableId::ParamsJ9,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TableId::StokesMu1 => "stokes-mu1",
            TableId::StokesMu1e5 => "stokes-mu1e-5",
            TableId::StructJ3 => "struct-j3",
            TableId::StructJ6 => "struct-j6",
            TableId::StructJ9 => "struct-j9",
            TableId::ParamsJ3 => "params-j3",
            TableId::ParamsJ6 => "params-j6",
            TableId::ParamsJ9 => "params-j9",
        }
    }

    /// Grid sizes used by the published tables.
    pub fn paper_sizes(self) -> &'static [usize] {
        match self {
            TableId::StokesMu1 | TableId::StokesMu1e5 => &[16, 24, 32],
            _ => &[16, 32, 64],
        }
    }

    fn j(self) -> Option<u32> {
        match self {
            TableId::StructJ3 | TableId::ParamsJ3 => Some(3),
            TableId::StructJ6 | TableId::ParamsJ6 => Some(6),
            TableId::StructJ9 | TableId::ParamsJ9 => Some(9),
            _ => None,
        }
    }
}

impl std::str::FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown table id {s:?}")))
    }
}

/// Reference `α` of the Stokes tables' header rows, by `(μ = 1?, q)`.
pub fn stokes_reference_alpha(mu_is_one: bool, q: usize) -> Option<f64> {
    let row: [f64; 3] = if mu_is_one {
        [10.0, 13.0, 15.0]
    } else {
        [30.0, 37.0, 57.0]
    };
    [16, 24, 32].iter().position(|&g| g == q).map(|i| row[i])
}

/// Reference `α` minimizing `ν(H(α))` for the structured problems (same for every `q`).
pub fn structured_alpha_exp(j: u32) -> Option<f64> {
    match j {
        3 => Some(0.03162),
        6 => Some(0.001),
        9 => Some(3.16e-5),
        _ => None,
    }
}

/// Tabulated estimated `α` (the second parameter block of the structured tables).
pub fn structured_alpha_h(j: u32, q: usize) -> Option<f64> {
    let row: [f64; 3] = match j {
        3 => [0.15678, 0.08055, 0.03295],
        6 => [0.14289, 0.08068, 0.03610],
        9 => [0.14102, 0.13766, 0.03878],
        _ => return None,
    };
    [16, 32, 64].iter().position(|&g| g == q).map(|i| row[i])
}

#[derive(Clone, Debug, Serialize)]
pub struct TableOptions {
    /// Grid sizes to run; defaults to the smallest published one.
    pub sizes: Option<Vec<usize>>,
    pub seed: u64,
    pub tol: f64,
    /// Outer limit as a multiple of `n`.
    pub maxit_factor: usize,
    /// Overrides the reference `α` of the Stokes tables.
    pub alpha: Option<f64>,
    /// Search `α_exp` on a log grid instead of using the reference value.
    pub alpha_search: bool,
    /// Points per decade of the `α` grid.
    pub grid_per_decade: usize,
    /// Directory for per-run residual traces.
    pub traces: Option<std::path::PathBuf>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            sizes: None,
            seed: 1,
            tol: 1e-6,
            maxit_factor: 2,
            alpha: None,
            alpha_search: false,
            grid_per_decade: 10,
            traces: None,
        }
    }
}

/// One row of a parameter table.
#[derive(Clone, Debug, Serialize)]
pub struct ParamRecord {
    pub size: usize,
    pub alpha_exp: f64,
    pub nu_exp: f64,
    pub alpha_h: Option<f64>,
    pub nu_h: Option<f64>,
    pub grid_points: usize,
    pub sweep_time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableResult {
    pub id: TableId,
    pub sizes: Vec<usize>,
    pub records: Vec<ExperimentRecord>,
    pub params: Vec<ParamRecord>,
}

/// Runs the method roster of one table over the requested sizes. Failed runs
/// become records with an outcome code; the table always completes.
pub fn run_table(id: TableId, opts: &TableOptions) -> Result<TableResult> {
    let sizes = opts.sizes.clone().unwrap_or_else(|| vec![id.paper_sizes()[0]]);
    let per_size: Vec<Result<(Vec<ExperimentRecord>, Option<ParamRecord>)>> = sizes
        .par_iter()
        .map(|&q| match id {
            TableId::StokesMu1 | TableId::StokesMu1e5 => stokes_column(id, q, opts).map(|r| (r, None)),
            TableId::StructJ3 | TableId::StructJ6 | TableId::StructJ9 => {
                structured_column(id.j().expect("structured id"), q, opts).map(|r| (r, None))
            }
            _ => params_column(id.j().expect("params id"), q, opts).map(|p| (Vec::new(), Some(p))),
        })
        .collect();
    let mut records = Vec::new();
    let mut params = Vec::new();
    for r in per_size {
        let (recs, p) = r?;
        records.extend(recs);
        params.extend(p);
    }
    if let Some(dir) = &opts.traces {
        for r in &records {
            let name = format!(
                "{}_q{}_{}{}.csv",
                id.as_str(),
                r.size,
                if r.block.is_empty() {
                    String::new()
                } else {
                    format!("{}_", r.block)
                },
                slug(&r.label)
            );
            write_trace(&dir.join(name), &r.residual_history, &r.inner_counts)?;
        }
    }
    Ok(TableResult {
        id,
        sizes,
        records,
        params,
    })
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            '′' => 'p',
            c if c.is_ascii_alphanumeric() => c.to_ascii_lowercase(),
            _ => '-',
        })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

struct Row<'a> {
    label: &'static str,
    block: &'static str,
    solver: SolverKind,
    splitting: Option<&'a Splitting>,
    ell: usize,
    inner_cap: Option<usize>,
    setup: f64,
    nu: Option<f64>,
}

fn run_rows(problem: &SaddleProblem, rows: &[Row<'_>], opts: &GmresOptions) -> Vec<ExperimentRecord> {
    rows.iter()
        .map(|row| {
            let m = Method {
                solver: row.solver,
                splitting: row.splitting,
                ell: row.ell,
                inner_cap: row.inner_cap,
            };
            let mut rec = match execute(problem, &m, opts) {
                Ok((rep, t)) => make_record(problem, &m, &rep, row.setup, t),
                Err(e) => error_record(problem, row.solver, &e),
            };
            rec.label = row.label.to_string();
            rec.block = row.block.to_string();
            rec.nu = row.nu;
            if row.solver == SolverKind::GmresInner {
                rec.ell = Some(row.ell);
            }
            log::info!(
                "{} q={} {}: {} iterations ({})",
                problem.describe(),
                problem.meta.q,
                rec.label,
                rec.outer_iterations,
                rec.outcome.as_str()
            );
            rec
        })
        .collect()
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64()))
}

fn gmres_opts(opts: &TableOptions, n: usize) -> GmresOptions {
    GmresOptions {
        tol: opts.tol,
        maxit: Some(opts.maxit_factor.max(1) * n),
        ..Default::default()
    }
}

fn stokes_column(id: TableId, q: usize, opts: &TableOptions) -> Result<Vec<ExperimentRecord>> {
    let mu_is_one = id == TableId::StokesMu1;
    let problem = stokes_generate(q, if mu_is_one { 1.0 } else { 1e-5 })?;
    let n = problem.n();
    let alpha = opts
        .alpha
        .or_else(|| stokes_reference_alpha(mu_is_one, q))
        .ok_or_else(|| Error::Config(format!("no reference alpha for grid {q}; pass one explicitly")))?;
    let (c, b) = problem.blocks.saddle().expect("stokes blocks");
    let beta = gss_default_beta(c, b)?;
    let (gss, t_gss) = timed(|| Splitting::gss(c, b, alpha, beta))?;
    let (igss, t_igss) = timed(|| Splitting::igss(c, b, alpha, beta, DEFAULT_INNER_TOL))?;
    // The flexible runs may need many more inner steps than n per outer step.
    let cap = Some(10 * n);
    let row = |label, solver, s, ell, setup| Row {
        label,
        block: "",
        solver,
        splitting: s,
        ell,
        inner_cap: cap,
        setup,
        nu: None,
    };
    let rows = [
        row("GMRES", SolverKind::Gmres, None, 1, 0.0),
        row("GSS (l=1)", SolverKind::GmresInner, Some(&gss), 1, t_gss),
        row("GSS (l=3)", SolverKind::GmresInner, Some(&gss), 3, t_gss),
        row("IGSS (l=1)", SolverKind::GmresInner, Some(&igss), 1, t_igss),
        row("IGSS (l=3)", SolverKind::GmresInner, Some(&igss), 3, t_igss),
        row("F-GSS", SolverKind::Fgmres, Some(&gss), 1, t_gss),
        row("F-IGSS", SolverKind::Fgmres, Some(&igss), 1, t_igss),
    ];
    Ok(run_rows(&problem, &rows, &gmres_opts(opts, n)))
}

fn sweep_grid(j: u32, per_decade: usize) -> Vec<f64> {
    // The optimum sits near 10^{−j/2}; cover two decades below it up to 1.
    let lo = -(0.5 * j as f64 + 2.0);
    log_grid(lo, 0.0, (-lo * per_decade as f64).round() as usize + 1)
}

fn alpha_exp_for(problem: &SaddleProblem, j: u32, opts: &TableOptions) -> Result<(f64, Option<f64>)> {
    if opts.alpha_search {
        let sweep = estimate_alpha_grid(
            problem,
            SplittingKind::Hss { alpha: 1.0 },
            &sweep_grid(j, opts.grid_per_decade),
        )?;
        Ok((sweep.alpha_best, Some(sweep.nu_best)))
    } else {
        let a = opts
            .alpha
            .or_else(|| structured_alpha_exp(j))
            .ok_or_else(|| Error::Config(format!("no reference alpha for j = {j}")))?;
        Ok((a, None))
    }
}

fn structured_column(j: u32, q: usize, opts: &TableOptions) -> Result<Vec<ExperimentRecord>> {
    let problem = structured_generate(q, j, DEFAULT_DENSITY, opts.seed)?;
    let n = problem.n();
    let gopts = gmres_opts(opts, n);
    let mut records = run_rows(
        &problem,
        &[Row {
            label: "GMRES",
            block: "",
            solver: SolverKind::Gmres,
            splitting: None,
            ell: 1,
            inner_cap: None,
            setup: 0.0,
            nu: None,
        }],
        &gopts,
    );
    let (a_exp, nu_exp) = alpha_exp_for(&problem, j, opts)?;
    let mut blocks = vec![("alpha_exp", a_exp, nu_exp)];
    if let Some(a_h) = structured_alpha_h(j, q) {
        blocks.push(("alpha_H", a_h, None));
    }
    for (block, alpha, nu) in blocks {
        let ((hss, ell), t_hss) = timed(|| {
            let s = Splitting::hss(&problem.a, alpha)?;
            let ell = select_inner_count(&s, &problem.b, 10, 0.1)?.ell;
            Ok((s, ell))
        })?;
        let (ihss, t_ihss) = timed(|| Splitting::ihss(&problem.a, alpha, DEFAULT_INNER_TOL, None))?;
        let row = |label, solver, s, ell, setup| Row {
            label,
            block,
            solver,
            splitting: s,
            ell,
            inner_cap: None,
            setup,
            nu,
        };
        let rows = [
            row("HSS", SolverKind::GmresInner, Some(&hss), 1, t_hss),
            row("HSS′", SolverKind::GmresInner, Some(&hss), ell, t_hss),
            row("IHSS", SolverKind::GmresInner, Some(&ihss), 1, t_ihss),
            row("IHSS′", SolverKind::GmresInner, Some(&ihss), ell, t_ihss),
            row("F-HSS′", SolverKind::Fgmres, Some(&hss), 1, t_hss),
            row("F-IHSS′", SolverKind::Fgmres, Some(&ihss), 1, t_ihss),
        ];
        records.extend(run_rows(&problem, &rows, &gopts));
    }
    Ok(records)
}

fn params_column(j: u32, q: usize, opts: &TableOptions) -> Result<ParamRecord> {
    let problem = structured_generate(q, j, DEFAULT_DENSITY, opts.seed)?;
    let grid = sweep_grid(j, opts.grid_per_decade);
    let (sweep, t) = timed(|| estimate_alpha_grid(&problem, SplittingKind::Hss { alpha: 1.0 }, &grid))?;
    let (alpha_h, nu_h) = match structured_alpha_h(j, q) {
        Some(a) => {
            let h = Splitting::hss(&problem.a, a)?.iteration_matrix()?;
            (Some(a), Some(spectral_report(&h, 1e-8)?.nu))
        }
        None => (None, None),
    };
    Ok(ParamRecord {
        size: q,
        alpha_exp: sweep.alpha_best,
        nu_exp: sweep.nu_best,
        alpha_h,
        nu_h,
        grid_points: grid.len(),
        sweep_time: t,
    })
}

/// Flat CSV row of an [`ExperimentRecord`].
#[derive(Serialize)]
struct CsvRecord<'a> {
    table: &'a str,
    size: usize,
    block: &'a str,
    label: &'a str,
    n: usize,
    solver: &'a str,
    splitting: &'a str,
    alpha: Option<f64>,
    beta: Option<f64>,
    nu: Option<f64>,
    ell: Option<usize>,
    outer_iterations: usize,
    inner_iterations_total: usize,
    outcome: &'a str,
    breakdown_step: Option<usize>,
    inner_failure_step: Option<usize>,
    final_relative_residual: f64,
    verified_relative_residual: f64,
    setup_time: Option<f64>,
    solve_time: Option<f64>,
    error: &'a str,
}

fn csv_rows<'a>(
    table: &'a str,
    records: &'a [ExperimentRecord],
    with_time: bool,
) -> impl Iterator<Item = CsvRecord<'a>> {
    records.iter().map(move |r| CsvRecord {
        table,
        size: r.size,
        block: &r.block,
        label: &r.label,
        n: r.n,
        solver: r.solver.as_str(),
        splitting: r.splitting.as_deref().unwrap_or(""),
        alpha: r.alpha,
        beta: r.beta,
        nu: r.nu,
        ell: r.ell,
        outer_iterations: r.outer_iterations,
        inner_iterations_total: r.inner_iterations_total,
        outcome: r.outcome.as_str(),
        breakdown_step: r.breakdown_step,
        inner_failure_step: r.inner_failure_step,
        final_relative_residual: r.final_relative_residual,
        verified_relative_residual: r.verified_relative_residual,
        setup_time: with_time.then_some(r.setup_time),
        solve_time: with_time.then_some(r.solve_time),
        error: r.error.as_deref().unwrap_or(""),
    })
}

/// Records as CSV text (one row per record). Time columns stay empty when
/// `with_time` is false, so outputs compare byte for byte.
pub fn records_csv(table: &str, records: &[ExperimentRecord], with_time: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in csv_rows(table, records, with_time) {
        w.serialize(row)?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn params_csv(table: &str, rows: &[ParamRecord], with_time: bool) -> Result<String> {
    #[derive(Serialize)]
    struct Flat<'a> {
        table: &'a str,
        size: usize,
        alpha_exp: f64,
        nu_exp: f64,
        alpha_h: Option<f64>,
        nu_h: Option<f64>,
        grid_points: usize,
        sweep_time: Option<f64>,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in rows {
        w.serialize(Flat {
            table,
            size: p.size,
            alpha_exp: p.alpha_exp,
            nu_exp: p.nu_exp,
            alpha_h: p.alpha_h,
            nu_h: p.nu_h,
            grid_points: p.grid_points,
            sweep_time: with_time.then_some(p.sweep_time),
        })?;
    }
    into_string(w)
}

impl TableResult {
    pub fn to_csv(&self, with_time: bool) -> Result<String> {
        if self.params.is_empty() {
            records_csv(self.id.as_str(), &self.records, with_time)
        } else {
            params_csv(self.id.as_str(), &self.params, with_time)
        }
    }

    /// Aligned text mirroring the published layout: one row per method, and
    /// `ℓ`, `Iter`, `Time` columns per size. Failed runs carry a mark:
    /// `†` inner failure, `b` breakdown, `m` iteration limit, `e` error.
    pub fn to_text(&self, with_time: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.id.as_str());
        if !self.params.is_empty() {
            let head: Vec<String> = self
                .params
                .iter()
                .map(|p| format!("{:>12}", format!("q = {}", p.size)))
                .collect();
            let _ = writeln!(out, "{:<16}{}", "", head.join(""));
            let fmt = |v: Option<f64>| v.map_or_else(|| format!("{:>12}", "-"), |x| format!("{x:>12.5}"));
            let fmt_a =
                |v: Option<f64>| v.map_or_else(|| format!("{:>12}", "-"), |x| format!("{:>12}", format_alpha(x)));
            let line = |name: &str, f: &dyn Fn(&ParamRecord) -> String| {
                format!("{name:<16}{}\n", self.params.iter().map(f).collect::<String>())
            };
            out += &line("alpha_exp", &|p| fmt_a(Some(p.alpha_exp)));
            out += &line("nu(alpha_exp)", &|p| fmt(Some(p.nu_exp)));
            out += &line("alpha_H", &|p| fmt_a(p.alpha_h));
            out += &line("nu(alpha_H)", &|p| fmt(p.nu_h));
            return out;
        }
        let mut head = format!("{:<10}{:<12}", "", "");
        for q in &self.sizes {
            let w = if with_time { 24 } else { 14 };
            head += &format!("|{:^w$}", format!("q = {q}"));
        }
        let _ = writeln!(out, "{head}");
        let mut sub = format!("{:<10}{:<12}", "", "");
        for _ in &self.sizes {
            sub += &format!("|{:>4}{:>10}", "l", "Iter");
            if with_time {
                sub += &format!("{:>10}", "Time");
            }
        }
        let _ = writeln!(out, "{sub}");
        // Row order follows the first size; other sizes are matched by (block, label).
        let first = self.sizes.first().copied().unwrap_or(0);
        for r in self.records.iter().filter(|r| r.size == first) {
            let mut line = format!("{:<10}{:<12}", r.block, r.label);
            for &q in &self.sizes {
                let cell = self
                    .records
                    .iter()
                    .find(|x| x.size == q && x.block == r.block && x.label == r.label);
                match cell {
                    Some(c) => {
                        let ell = c
                            .ell
                            .filter(|_| c.label.contains('′'))
                            .map_or(String::new(), |l| l.to_string());
                        let mark = match c.outcome {
                            Outcome::Converged | Outcome::HappyBreakdown => "",
                            Outcome::InnerFailure => "†",
                            Outcome::Breakdown => "b",
                            Outcome::MaxIterations => "m",
                            Outcome::Error => "e",
                        };
                        // A dagger cell shows the outer step at which the inner solver gave up.
                        let count = c.inner_failure_step.unwrap_or(c.outer_iterations);
                        line += &format!("|{:>4}{:>10}", ell, format!("{count}{mark}"));
                        if with_time {
                            line += &format!("{:>10.3}", c.setup_time + c.solve_time);
                        }
                    }
                    None => {
                        line += &format!("|{:>14}", "");
                        if with_time {
                            line += &format!("{:>10}", "");
                        }
                    }
                }
            }
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// Writes `<id>.csv` and `<id>.txt` into `dir`.
    pub fn write(&self, dir: &Path, with_time: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.csv", self.id.as_str())), self.to_csv(with_time)?)?;
        fs::write(dir.join(format!("{}.txt", self.id.as_str())), self.to_text(with_time))?;
        Ok(())
    }
}

fn format_alpha(a: f64) -> String {
    if a >= 1e-3 {
        format!("{a:.5}")
    } else {
        format!("{a:.2e}")
    }
}
