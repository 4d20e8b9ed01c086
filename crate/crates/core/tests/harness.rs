use inner_gmres::harness::{
    run_single, run_table, AlphaSource, ExperimentConfig, InnerSteps, MethodSpec, Outcome, ProblemSpec, SolverKind,
    SplittingName, SplittingSpec, TableId, TableOptions,
};

fn stokes_config(q: usize, solver: SolverKind, splitting: Option<SplittingSpec>) -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemSpec::Stokes {
            q,
            mu: 1.0,
            convection: Default::default(),
        },
        method: MethodSpec {
            solver,
            splitting,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn identity_problem_takes_one_iteration() {
    let cfg = ExperimentConfig {
        problem: ProblemSpec::Identity { n: 12 },
        ..Default::default()
    };
    let rec = run_single(&cfg).unwrap();
    assert_eq!(rec.outer_iterations, 1);
    // The first Arnoldi vector spans the solution, so the step ends in a happy breakdown.
    assert_eq!(rec.outcome, Outcome::HappyBreakdown);
    assert!(rec.converged());
    assert!(rec.verified_relative_residual < 1e-14);
    assert_eq!(rec.label, "GMRES");
}

#[test]
fn inner_cap_forces_inner_failure() {
    let spec = SplittingSpec::new(SplittingName::Igss).with_alpha(10.0);
    let mut cfg = stokes_config(8, SolverKind::Fgmres, Some(spec));
    cfg.method.inner_cap = Some(1);
    let rec = run_single(&cfg).unwrap();
    assert_eq!(rec.outcome, Outcome::InnerFailure);
    let step = rec.inner_failure_step.expect("failure step recorded");
    assert_eq!(rec.outer_iterations, step - 1);
    assert!(!rec.converged());
}

#[test]
fn repeated_runs_are_identical() {
    let spec = SplittingSpec::new(SplittingName::Gss).with_alpha(10.0);
    let mut cfg = stokes_config(8, SolverKind::GmresInner, Some(spec));
    cfg.method.inner_steps = InnerSteps::Fixed { ell: 3 };
    let a = run_single(&cfg).unwrap();
    let b = run_single(&cfg).unwrap();
    assert_eq!(a.outer_iterations, b.outer_iterations);
    assert_eq!(a.residual_history, b.residual_history);
    assert_eq!(a.outcome, Outcome::Converged);
    assert_eq!(a.ell, Some(3));
    assert!(a.inner_counts.iter().all(|&c| c == 3));
    assert_eq!(a.inner_iterations_total, 3 * a.outer_iterations);
}

#[test]
fn converged_records_reverify() {
    for (solver, name) in [
        (SolverKind::Gmres, None),
        (SolverKind::GmresInner, Some(SplittingName::Gss)),
        (SolverKind::Fgmres, Some(SplittingName::Gss)),
        (SolverKind::Fgmres, Some(SplittingName::Igss)),
    ] {
        let spec = name.map(|n| {
            let s = SplittingSpec::new(n);
            if s.needs_alpha() {
                s.with_alpha(10.0)
            } else {
                s
            }
        });
        let rec = run_single(&stokes_config(8, solver, spec)).unwrap();
        if rec.converged() {
            assert!(
                rec.verified_relative_residual <= 1.01e-6,
                "{}: {}",
                rec.label,
                rec.verified_relative_residual
            );
        }
    }
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = stokes_config(
        16,
        SolverKind::GmresInner,
        Some(SplittingSpec {
            beta: Some(0.25),
            inner_tol: Some(0.05),
            ..SplittingSpec::new(SplittingName::Igss).with_alpha(13.0)
        }),
    );
    cfg.method.inner_steps = InnerSteps::Select { cap: 10, tol: 0.1 };
    cfg.method.alpha_source = AlphaSource::GridSearch {
        lo_exp: -3.0,
        hi_exp: 0.0,
        points: 31,
    };
    cfg.maxit = Some(1540);
    cfg.seed = 42;
    cfg.trace = Some("trace.csv".into());
    let text = cfg.to_toml().unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);

    let defaults = ExperimentConfig::default();
    assert_eq!(
        ExperimentConfig::from_toml(&defaults.to_toml().unwrap()).unwrap(),
        defaults
    );
    assert_eq!(ExperimentConfig::from_toml("").unwrap(), defaults);
}

#[test]
fn structured_config_from_text() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 7
        [problem]
        family = "structured"
        q = 16
        j = 3
        [method]
        solver = "gmres-inner"
        inner_steps = { mode = "fixed", ell = 2 }
        [method.splitting]
        name = "hss"
        alpha = 0.03162
        "#,
    )
    .unwrap();
    assert!(matches!(cfg.problem, ProblemSpec::Structured { j: 3, .. }));
    assert_eq!(cfg.method.splitting.as_ref().unwrap().alpha, Some(0.03162));
    assert!(ExperimentConfig::from_toml("[problem]\nfamily = \"nope\"").is_err());

    let sel = ExperimentConfig::from_toml("[method]\ninner_steps = { mode = \"select\" }").unwrap();
    assert_eq!(sel.method.inner_steps, InnerSteps::Select { cap: 10, tol: 0.1 });
}

#[test]
fn missing_alpha_is_a_config_error() {
    let cfg = stokes_config(8, SolverKind::GmresInner, Some(SplittingSpec::new(SplittingName::Gss)));
    assert!(run_single(&cfg).is_err());
}

#[test]
fn table_is_deterministic_without_time() {
    let opts = TableOptions {
        sizes: Some(vec![16]),
        ..Default::default()
    };
    let a = run_table(TableId::StokesMu1, &opts).unwrap();
    let b = run_table(TableId::StokesMu1, &opts).unwrap();
    assert_eq!(a.to_csv(false).unwrap(), b.to_csv(false).unwrap());
    assert_eq!(a.records.len(), 7);
    let gmres = &a.records[0];
    assert_eq!(gmres.label, "GMRES");
    assert!((131..=160).contains(&gmres.outer_iterations));
    for r in a.records.iter().filter(|r| r.converged()) {
        assert!(r.verified_relative_residual <= 1.01e-6);
    }
    let text = a.to_text(false);
    assert!(text.contains("GMRES"));
    assert!(!text.contains("time"));
}
