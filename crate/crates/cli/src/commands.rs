use std::fmt::Write as _;
use std::fs;

use inner_gmres::analysis::{disk_check, estimate_alpha_grid, gp_test, index_of, log_grid, spectral_report};
use inner_gmres::harness::{
    records_csv, run_single, run_table, AlphaSource, ExperimentConfig, ExperimentRecord, InnerSteps, Outcome,
    ProblemSpec, SolverKind, SplittingName, SplittingSpec, TableId, TableOptions,
};
use inner_gmres::problems::{
    read_problem, stokes_generate_with, structured_generate, verify_problem, write_problem, Convection,
    DEFAULT_DENSITY, DENSE_BUDGET,
};
use inner_gmres::splittings::Splitting;
use inner_gmres::{Error, Result};

use crate::{
    AnalyzeArgs, Command, EstimateArgs, FamilyArg, GenerateArgs, SolveArgs, SplittingArgs, TableArgs, VerifyArgs,
};

/// `print!`/`println!` that exit quietly when stdout is closed (e.g. piped
/// into `head`).
macro_rules! emit {
    ($mac:ident, $($arg:tt)*) => {{
        use std::io::Write as _;
        if let Err(e) = $mac!(std::io::stdout(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
        }
    }};
}

macro_rules! out {
    ($($arg:tt)*) => { emit!(write, $($arg)*) };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit!(writeln, $($arg)*) };
}

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BREAKDOWN: u8 = 3;
pub const EXIT_INNER_FAILURE: u8 = 4;

pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::Dimension(_)
        | Error::MatrixMarket(_)
        | Error::Io(_)
        | Error::Csv(_) => EXIT_INVALID,
        _ => EXIT_FAILURE,
    }
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Converged | Outcome::HappyBreakdown => 0,
        Outcome::Breakdown => EXIT_BREAKDOWN,
        Outcome::InnerFailure => EXIT_INNER_FAILURE,
        Outcome::MaxIterations | Outcome::Error => EXIT_FAILURE,
    }
}

pub fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Generate(a) => generate(&a),
        Command::Solve(a) => solve(&a),
        Command::Analyze(a) => analyze(&a),
        Command::EstimateAlpha(a) => estimate(&a),
        Command::Table(a) => table(&a),
        Command::Verify(a) => verify(&a),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Parses `lo:hi:points`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, points] = parts[..] else {
        return Err(invalid(format!("grid must be lo:hi:points, got {s:?}")));
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("bad grid bound {t:?}")))
    };
    let points = points
        .trim()
        .parse::<usize>()
        .map_err(|_| invalid(format!("bad grid point count {points:?}")))?;
    let (lo, hi) = (num(lo)?, num(hi)?);
    if points == 0 || lo > hi {
        return Err(invalid(format!("empty grid {s:?}")));
    }
    Ok((lo, hi, points))
}

/// Parses `q=16`, `16,32` or `q=16,32`.
pub fn parse_subset(s: &str) -> Result<Vec<usize>> {
    let body = s.trim().strip_prefix("q=").unwrap_or(s.trim());
    body.split(',')
        .map(|t| {
            let t = t.trim();
            t.strip_prefix("q=")
                .unwrap_or(t)
                .parse()
                .map_err(|_| invalid(format!("bad size {t:?} in subset {s:?}")))
        })
        .collect()
}

fn generate(a: &GenerateArgs) -> Result<u8> {
    let p = match a.family {
        FamilyArg::Stokes => {
            let conv: Convection = a
                .convection
                .parse()
                .map_err(|_| invalid(format!("unknown convection {:?}", a.convection)))?;
            stokes_generate_with(a.q, a.mu, conv)?
        }
        FamilyArg::Structured => structured_generate(a.q, a.j, a.density.unwrap_or(DEFAULT_DENSITY), a.seed)?,
    };
    write_problem(&a.out, &p)?;
    outln!("wrote {} to {}", p.describe(), a.out.display());
    outln!("n = {}", p.n());
    outln!("nnz = {}", p.a.nnz());
    outln!("density = {:.6e}", p.meta.density);
    if let Some(c) = p.meta.condition {
        outln!("condition = {c:.8e}");
    }
    Ok(0)
}

fn apply_params(spec: &mut SplittingSpec, p: &SplittingArgs) {
    if p.alpha.is_some() {
        spec.alpha = p.alpha;
    }
    if p.beta.is_some() {
        spec.beta = p.beta;
    }
    if p.omega.is_some() {
        spec.omega = p.omega;
    }
    if p.inner_tol.is_some() {
        spec.inner_tol = p.inner_tol;
    }
    if p.inner_maxit.is_some() {
        spec.inner_maxit = p.inner_maxit;
    }
}

fn has_params(p: &SplittingArgs) -> bool {
    p.alpha.is_some() || p.beta.is_some() || p.omega.is_some() || p.inner_tol.is_some() || p.inner_maxit.is_some()
}

/// Flags override the config file, which overrides the defaults.
pub fn resolve_solve_config(a: &SolveArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_toml(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = &a.problem {
        cfg.problem = ProblemSpec::Directory { path: dir.clone() };
    }
    if let Some(m) = &a.method {
        cfg.method.solver = m.parse::<SolverKind>()?;
    }
    if let Some(name) = &a.splitting {
        let name: SplittingName = name.parse()?;
        if cfg.method.splitting.as_ref().map(|s| s.name) != Some(name) {
            cfg.method.splitting = Some(SplittingSpec::new(name));
        }
    }
    match cfg.method.splitting.as_mut() {
        Some(spec) => apply_params(spec, &a.params),
        None if has_params(&a.params) => return Err(invalid("splitting parameters given without --splitting")),
        None => {}
    }
    if let Some(ell) = &a.ell {
        cfg.method.inner_steps = if ell == "auto" {
            InnerSteps::Select { cap: 10, tol: 0.1 }
        } else {
            let ell: usize = ell
                .parse()
                .map_err(|_| invalid(format!("--ell must be a count or auto, got {ell:?}")))?;
            if ell == 0 {
                return Err(invalid("--ell must be at least 1"));
            }
            InnerSteps::Fixed { ell }
        };
    }
    if let Some(g) = &a.alpha_grid {
        let (lo_exp, hi_exp, points) = parse_grid(g)?;
        cfg.method.alpha_source = AlphaSource::GridSearch { lo_exp, hi_exp, points };
    }
    if a.inner_cap.is_some() {
        cfg.method.inner_cap = a.inner_cap;
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if a.maxit.is_some() {
        cfg.maxit = a.maxit;
    }
    if a.reorthogonalize {
        cfg.reorthogonalize = true;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.trace.is_some() {
        cfg.trace = a.trace.clone();
    }
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    Ok(cfg)
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

pub fn format_record(r: &ExperimentRecord, with_time: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method      {}", r.label);
    let _ = writeln!(s, "problem     {} (n = {})", r.problem, r.n);
    let _ = writeln!(s, "alpha       {}", opt(r.alpha));
    let _ = writeln!(s, "beta        {}", opt(r.beta));
    let _ = writeln!(s, "nu          {}", opt(r.nu.map(|v| format!("{v:.6}"))));
    let _ = writeln!(s, "ell         {}", opt(r.ell));
    let _ = writeln!(s, "Iter        {}", r.outer_iterations);
    let _ = writeln!(s, "inner total {}", r.inner_iterations_total);
    let _ = writeln!(s, "outcome     {}", r.outcome.as_str());
    if let Some(k) = r.breakdown_step {
        let _ = writeln!(s, "breakdown   step {k}");
    }
    if let Some(k) = r.inner_failure_step {
        let _ = writeln!(s, "inner fail  step {k}");
    }
    let _ = writeln!(s, "residual    {:.3e}", r.final_relative_residual);
    let _ = writeln!(s, "verified    {:.3e}", r.verified_relative_residual);
    if with_time {
        let _ = writeln!(s, "setup time  {:.3} s", r.setup_time);
        let _ = writeln!(s, "solve time  {:.3} s", r.solve_time);
    }
    s
}

fn solve(a: &SolveArgs) -> Result<u8> {
    let cfg = resolve_solve_config(a)?;
    let rec = run_single(&cfg)?;
    out!("{}", format_record(&rec, !a.no_time));
    outln!("# resolved config");
    out!("{}", cfg.to_toml()?);
    if let Some(path) = &cfg.output {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, records_csv("solve", std::slice::from_ref(&rec), !a.no_time)?)?;
    }
    Ok(outcome_code(rec.outcome))
}

fn build_splitting(
    problem: &inner_gmres::problems::SaddleProblem,
    name: &str,
    params: &SplittingArgs,
) -> Result<Splitting> {
    let mut spec = SplittingSpec::new(name.parse()?);
    apply_params(&mut spec, params);
    Splitting::from_kind(&problem.a, problem.blocks.saddle(), spec.resolve(problem)?)
}

fn analyze(a: &AnalyzeArgs) -> Result<u8> {
    if a.ell == 0 {
        return Err(invalid("--ell must be at least 1"));
    }
    let p = read_problem(&a.problem)?;
    let s = build_splitting(&p, &a.splitting, &a.params)?;
    if !s.is_exact() {
        return Err(invalid("analyze needs an exact splitting"));
    }
    outln!("problem          {} (n = {})", p.describe(), p.n());
    outln!("splitting        {:?}", s.kind());
    let rep = spectral_report(&s.iteration_matrix()?, 1e-8)?;
    outln!("rho(H)           {:.8}", rep.rho);
    outln!("nu(H)            {:.8}", rep.nu);
    outln!("semiconvergent   {}", rep.semiconvergent);
    outln!(
        "eigenvalue one   algebraic {}, geometric {}",
        rep.one_multiplicity.0,
        rep.one_multiplicity.1
    );
    let ad = p.a.to_dense();
    outln!("A is GP          {}", gp_test(&ad)?);
    if a.index {
        let idx = index_of(&ad, 8)?;
        outln!("index(A)         {} (ranks {:?})", idx.index, idx.rank_sequence);
    }
    let disk = disk_check(&s, a.ell)?;
    if disk.computed {
        outln!(
            "disk (l = {})     radius {:.6e}, rank {}",
            a.ell,
            disk.radius,
            disk.rank
        );
        outln!("  disk excess    {:.3e}", disk.max_disk_excess);
        outln!("  zero modulus   {:.3e}", disk.max_zero_modulus);
        outln!("  pairing error  {:.3e}", disk.max_pairing_error);
        outln!("  passed         {}", disk.passed);
    } else {
        outln!("disk             skipped (n above the dense budget)");
    }
    Ok(0)
}

fn estimate(a: &EstimateArgs) -> Result<u8> {
    let p = read_problem(&a.problem)?;
    let name: SplittingName = a.splitting_kind.parse()?;
    if !matches!(name, SplittingName::Gss | SplittingName::Hss) {
        return Err(invalid("--splitting-kind must be gss or hss"));
    }
    let spec = SplittingSpec {
        beta: a.beta,
        ..SplittingSpec::new(name).with_alpha(1.0)
    };
    let (lo, hi, points) = parse_grid(&a.grid)?;
    let sweep = estimate_alpha_grid(&p, spec.resolve(&p)?, &log_grid(lo, hi, points))?;
    outln!("{:>14} {:>12} {:>12}", "alpha", "nu", "rho");
    for pt in &sweep.table {
        match (pt.nu, pt.rho) {
            (Some(nu), Some(rho)) => outln!("{:>14.6e} {nu:>12.8} {rho:>12.8}", pt.alpha),
            _ => outln!(
                "{:>14.6e} {:>12} {:>12}  ({})",
                pt.alpha,
                "-",
                "-",
                pt.error.as_deref().unwrap_or("")
            ),
        }
    }
    outln!("best alpha = {:.6e}, nu = {:.8}", sweep.alpha_best, sweep.nu_best);
    if let Some(path) = &a.out {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["alpha", "nu", "rho", "error"])?;
        for pt in &sweep.table {
            w.write_record([
                format!("{:e}", pt.alpha),
                pt.nu.map_or(String::new(), |v| format!("{v:e}")),
                pt.rho.map_or(String::new(), |v| format!("{v:e}")),
                pt.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    Ok(0)
}

fn table(a: &TableArgs) -> Result<u8> {
    let id: TableId = a.id.parse()?;
    let opts = TableOptions {
        sizes: a.subset.as_deref().map(parse_subset).transpose()?,
        seed: a.seed,
        alpha: a.alpha,
        alpha_search: a.alpha_search,
        traces: a.traces.clone(),
        ..Default::default()
    };
    let t = run_table(id, &opts)?;
    out!("{}", t.to_text(!a.no_time));
    if let Some(dir) = &a.out {
        t.write(dir, !a.no_time)?;
    }
    Ok(0)
}

fn verify(a: &VerifyArgs) -> Result<u8> {
    let p = read_problem(&a.problem)?;
    let rep = verify_problem(&p, DENSE_BUDGET)?;
    outln!("problem {} (n = {})", p.describe(), p.n());
    for c in &rep.checks {
        let status = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "skip",
        };
        outln!("{status}  {:<36} {}", c.name, c.detail);
    }
    Ok(if rep.all_passed() { 0 } else { EXIT_FAILURE })
}
