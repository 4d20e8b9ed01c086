//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Pass criterion numbers as arguments to run a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{random_vec, rng, semiconvergent_fixtures, Fixture};
use inner_gmres::analysis::{appendix_fixture, bound_evaluate, disk_check, gp_test, index_of, RadiusChoice};
use inner_gmres::harness::{
    execute, independent_residual, run_table, ExperimentRecord, Method, SolverKind, TableId, TableOptions,
};
use inner_gmres::krylov::{fgmres, gmres, gmres_with_state, GmresOptions, Termination};
use inner_gmres::matcore::linalg::singular_values;
use inner_gmres::matcore::vector::{norm2, rel_diff};
use inner_gmres::matcore::{DenseMatrix, SparseMatrix};
use inner_gmres::problems::{stokes_generate, structured_generate, verify_problem, DEFAULT_DENSITY};
use inner_gmres::splittings::{gss_default_beta, InnerIteration, Splitting, SplittingKind};
use nalgebra::DMatrix;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn row<'a>(recs: &'a [ExperimentRecord], block: &str, label: &str) -> &'a ExperimentRecord {
    recs.iter()
        .find(|r| r.block == block && r.label == label)
        .unwrap_or_else(|| panic!("no row {block}/{label}"))
}

/// `|x − center| ≤ rel · center`.
fn within_rel(x: usize, center: f64, rel: f64) -> bool {
    (x as f64 - center).abs() <= rel * center
}

fn within_abs(x: usize, center: f64, band: f64) -> bool {
    (x as f64 - center).abs() <= band
}

fn iters(r: &ExperimentRecord) -> String {
    if r.converged() {
        r.outer_iterations.to_string()
    } else {
        format!("{}({})", r.outer_iterations, r.outcome.as_str())
    }
}

fn c1_stokes_mu1() -> Outcome {
    let t = Instant::now();
    let tab = run_table(
        TableId::StokesMu1,
        &TableOptions {
            sizes: Some(vec![16]),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let r = &tab.records;
    let (g, g3, g1, fg) = (
        row(r, "", "GMRES"),
        row(r, "", "GSS (l=3)"),
        row(r, "", "GSS (l=1)"),
        row(r, "", "F-GSS"),
    );
    let oks = [
        g.converged() && within_rel(g.outer_iterations, 145.0, 0.10),
        g3.converged() && within_abs(g3.outer_iterations, 13.0, 3.0),
        g1.converged() && within_abs(g1.outer_iterations, 19.0, 3.0),
        fg.converged() && within_rel(fg.outer_iterations, 29.0, 0.20),
        secs <= 60.0,
    ];
    let mark = |ok: bool| if ok { "" } else { "!" };
    check(
        oks.iter().all(|&b| b),
        format!(
            "GMRES {}{} [145±10%], GSS(l=3) {}{} [13±3], GSS(l=1) {}{} [19±3], F-GSS {}{} [29±20%], {secs:.1}s{} [≤60s]",
            iters(g),
            mark(oks[0]),
            iters(g3),
            mark(oks[1]),
            iters(g1),
            mark(oks[2]),
            iters(fg),
            mark(oks[3]),
            mark(oks[4])
        ),
    )
}

fn c2_stokes_mu1e5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (q, alpha) in [(16, 30.0), (24, 37.0), (32, 57.0)] {
        let t = Instant::now();
        let p = stokes_generate(q, 1e-5).map_err(|e| e.to_string())?;
        let n = p.n();
        let (c, b) = p.blocks.saddle().unwrap();
        let beta = gss_default_beta(c, b).map_err(|e| e.to_string())?;
        let s = Splitting::gss(c, b, alpha, beta).map_err(|e| e.to_string())?;
        let opts = GmresOptions {
            maxit: Some(2 * n),
            ..Default::default()
        };
        let run = |solver, ell| -> Result<usize, String> {
            let m = Method {
                solver,
                splitting: Some(&s),
                ell,
                inner_cap: None,
            };
            let (rep, _) = execute(&p, &m, &opts).map_err(|e| e.to_string())?;
            if rep.termination.is_solution() {
                Ok(rep.outer_iterations)
            } else {
                Err(format!("q={q} ell={ell}: {}", rep.termination.as_str()))
            }
        };
        let g = run(SolverKind::Gmres, 1)?;
        let g1 = run(SolverKind::GmresInner, 1)?;
        let g3 = run(SolverKind::GmresInner, 3)?;
        let secs = t.elapsed().as_secs_f64();
        let order = g3 < g1 && g1 < g;
        ok &= order;
        let mut note = String::new();
        if q == 16 {
            let band = within_rel(g, 766.0, 0.10) && within_rel(g3, 561.0, 0.10);
            ok &= band;
            if !band {
                note.push_str(" counts outside [766±10%, 561±10%]");
            }
        }
        if q == 32 && secs > 600.0 {
            ok = false;
            note.push_str(" over 10 min");
        }
        parts.push(format!(
            "q={q}: GSS(l=3) {g3} < GSS(l=1) {g1} < GMRES {g}{} ({secs:.0}s){note}",
            if order { "" } else { " VIOLATED" }
        ));
    }
    check(ok, parts.join("; "))
}

fn c3_params() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, alpha_ref, nu_ref, nu_tol) in [
        (TableId::ParamsJ3, 0.03162, 0.93869, 1e-3),
        (TableId::ParamsJ6, 0.00100, 0.99800, 1e-3),
        (TableId::ParamsJ9, 3.16e-5, 0.99993, 1e-4),
    ] {
        let tab = run_table(id, &TableOptions::default()).map_err(|e| e.to_string())?;
        let p = &tab.params[0];
        // Grid points are exact powers of ten; the reference values are rounded.
        let alpha_ok = (p.alpha_exp / alpha_ref - 1.0).abs() < 1e-3;
        let nu_ok = (p.nu_exp - nu_ref).abs() <= nu_tol;
        let time_ok = p.sweep_time <= 300.0;
        ok &= alpha_ok && nu_ok && time_ok;
        parts.push(format!(
            "{}: alpha {:.4e}{} nu {:.5}{} ({:.0}s, {} points)",
            id.as_str(),
            p.alpha_exp,
            if alpha_ok { "" } else { "!" },
            p.nu_exp,
            if nu_ok { "" } else { "!" },
            p.sweep_time,
            p.grid_points
        ));
    }
    check(ok, parts.join("; "))
}

fn c4_struct_j3() -> Outcome {
    let tab = run_table(
        TableId::StructJ3,
        &TableOptions {
            sizes: Some(vec![16]),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let r = &tab.records;
    let (g, hss, hssp) = (
        row(r, "", "GMRES"),
        row(r, "alpha_exp", "HSS"),
        row(r, "alpha_exp", "HSS′"),
    );
    let oks = [
        hssp.ell == Some(7) && hssp.converged() && within_rel(hssp.outer_iterations, 19.0, 0.15),
        hss.converged() && within_rel(hss.outer_iterations, 47.0, 0.15),
        g.converged() && within_rel(g.outer_iterations, 112.0, 0.10),
    ];
    let mark = |ok: bool| if ok { "" } else { "!" };
    check(
        oks.iter().all(|&b| b),
        format!(
            "HSS′ (l={}) {}{} [19±15%], HSS {}{} [47±15%], GMRES {}{} [112±10%]",
            hssp.ell.unwrap_or(0),
            iters(hssp),
            mark(oks[0]),
            iters(hss),
            mark(oks[1]),
            iters(g),
            mark(oks[2])
        ),
    )
}

fn c5_condition() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    for q in [16, 32] {
        for j in [3, 6, 9] {
            let p = structured_generate(q, j, DEFAULT_DENSITY, 1).map_err(|e| e.to_string())?;
            let rep = verify_problem(&p, 2000).map_err(|e| e.to_string())?;
            let c = rep.get("condition-identity").ok_or("no condition check")?;
            let expected = 2f64.sqrt() * 10f64.powi(j as i32);
            let rel = (c.value - expected).abs() / expected;
            worst = worst.max(rel);
            ok &= c.passed == Some(true) && rel <= 1e-6;
        }
    }
    check(ok, format!("6 problems, worst relative error {worst:.2e} [≤1e-6]"))
}

fn consistent_rhs(f: &Fixture, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    f.a().matvec(&random_vec(&mut r, f.n())).unwrap()
}

fn c6_no_breakdown() -> Outcome {
    let mut runs = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (i, f) in semiconvergent_fixtures().iter().enumerate() {
        let b = consistent_rhs(f, 100 + i as u64);
        for ell in [1, 2, 3, 5] {
            runs += 1;
            let p = InnerIteration::new(&f.s, ell).unwrap();
            let rep = gmres(f.a(), &b, Some(&p), None, &GmresOptions::default()).unwrap();
            let res = independent_residual(f.a(), &b, &rep.x);
            if rep.termination == Termination::BreakdownWithoutSolution {
                failures.push(format!("{} l={ell}: breakdown at {:?}", f.name, rep.breakdown_step));
            } else if rep.termination.is_solution() {
                worst = worst.max(res);
                if res > 1e-6 {
                    failures.push(format!("{} l={ell}: residual {res:.2e}", f.name));
                }
            } else {
                failures.push(format!("{} l={ell}: {}", f.name, rep.termination.as_str()));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{runs} runs, worst verified residual {worst:.2e}; {}",
            summary(&failures)
        ),
    )
}

fn summary(failures: &[String]) -> String {
    if failures.is_empty() {
        "no failures".into()
    } else {
        format!("{} failures: {}", failures.len(), failures.join(", "))
    }
}

fn c7_fgmres() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let fx = semiconvergent_fixtures();
    for (i, f) in fx.iter().enumerate() {
        let b = consistent_rhs(f, 200 + i as u64);
        let p = InnerIteration::adaptive(&f.s);
        let rep = fgmres(f.a(), &b, &p, None, &GmresOptions::default(), 100 * f.n()).unwrap();
        let res = independent_residual(f.a(), &b, &rep.x);
        if rep.termination.is_solution() && res <= 1e-6 {
            worst = worst.max(res);
        } else {
            failures.push(format!("{}: {} residual {res:.2e}", f.name, rep.termination.as_str()));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} runs, worst verified residual {worst:.2e}; {}",
            fx.len(),
            summary(&failures)
        ),
    )
}

fn c8_disk() -> Outcome {
    let mut failures = Vec::new();
    let (mut excess, mut zero, mut pair) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut runs = 0;
    for f in semiconvergent_fixtures() {
        for ell in [1, 2, 3] {
            runs += 1;
            let d = disk_check(&f.s, ell).unwrap();
            excess = excess.max(d.max_disk_excess);
            zero = zero.max(d.max_zero_modulus);
            pair = pair.max(d.max_pairing_error);
            if !d.passed {
                failures.push(format!(
                    "{} l={ell}: excess {:.2e} zero {:.2e} pairing {:.2e}",
                    f.name, d.max_disk_excess, d.max_zero_modulus, d.max_pairing_error
                ));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{runs} cases: max disk excess {excess:.2e} [≤1e-8], max zero modulus {zero:.2e} [≤1e-8], max pairing error {pair:.2e} [≤1e-6]; {}",
            summary(&failures)
        ),
    )
}

/// Orthonormal basis of `K_m(op, v)` by Arnoldi with two Gram–Schmidt passes;
/// stops early if the space becomes invariant.
fn krylov_basis(op: impl Fn(&[f64]) -> Vec<f64>, v: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut w = v.to_vec();
    let scale = norm2(v);
    for _ in 0..m {
        for _ in 0..2 {
            for u in &q {
                let h: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(u).for_each(|(x, y)| *x -= h * y);
            }
        }
        let nw = norm2(&w);
        if nw <= 1e-12 * scale {
            break;
        }
        let next: Vec<f64> = w.iter().map(|x| x / nw).collect();
        w = op(&next);
        q.push(next);
    }
    q
}

fn projection_residual(q: &[Vec<f64>], z: &[f64]) -> f64 {
    let mut r = z.to_vec();
    for _ in 0..2 {
        for u in q {
            let h: f64 = u.iter().zip(&r).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(u).for_each(|(x, y)| *x -= h * y);
        }
    }
    norm2(&r) / norm2(z)
}

fn c9_inclusion() -> Outcome {
    let fx: Vec<Fixture> = semiconvergent_fixtures()
        .into_iter()
        .filter(|f| f.n() <= 40)
        .take(10)
        .collect();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (i, f) in fx.iter().enumerate() {
        let b = consistent_rhs(f, 300 + i as u64);
        for ell in [2, 3] {
            let p = InnerIteration::new(&f.s, ell).unwrap();
            let opts = GmresOptions {
                maxit: Some(4),
                ..Default::default()
            };
            let (_, st) = gmres_with_state(f.a(), &b, Some(&p), None, &opts).unwrap();
            let c1r0 = f.s.apply_cl(&b, 1).unwrap();
            let op = |v: &[f64]| f.s.apply_cl(&f.a().matvec(v).unwrap(), 1).unwrap();
            for (k, z) in st.z.iter().enumerate() {
                let basis = krylov_basis(op, &c1r0, (k + 1) * ell);
                worst = worst.max(projection_residual(&basis, z));
                checked += 1;
            }
        }
    }
    check(
        fx.len() == 10 && worst <= 1e-8,
        format!(
            "{} fixtures, {checked} directions, worst projection residual {worst:.2e} [≤1e-8]",
            fx.len()
        ),
    )
}

fn c10_lemmas() -> Outcome {
    let mut min_sigma = f64::INFINITY;
    let mut failures = Vec::new();
    let fx = semiconvergent_fixtures();
    for f in &fx {
        let h = f.s.iteration_matrix().unwrap();
        let n = f.n();
        let mut power = DenseMatrix::identity(n);
        let mut sum = DenseMatrix::zeros(n, n);
        for ell in 1..=6 {
            sum = sum.add(&power).unwrap();
            power = power.matmul(&h).unwrap();
            let sv = singular_values(&sum).unwrap();
            let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
            min_sigma = min_sigma.min(smin);
            if smin <= 1e-8 {
                failures.push(format!("{} l={ell}: sigma_min {smin:.2e}", f.name));
            }
            let ih = DenseMatrix::identity(n).sub(&power).unwrap();
            if !gp_test(&ih).unwrap() {
                failures.push(format!("{} l={ell}: I − H^l not GP", f.name));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} fixtures × l=1..6, smallest sigma_min {min_sigma:.2e} [>1e-8], GP checks; {}",
            fx.len(),
            summary(&failures)
        ),
    )
}

fn c11_appendix() -> Outcome {
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for (d, n) in [(1, 8), (2, 10), (3, 12)] {
        let fx = appendix_fixture(d, n, 40 + d as u64).unwrap();
        let a = SparseMatrix::from_dense(&fx.a);
        let idx = index_of(&fx.a, n).unwrap().index;
        if idx != d {
            failures.push(format!("d={d}: index_of gave {idx}"));
        }
        let good = gmres(&a, &fx.b_good, None, Some(&fx.x0_good), &GmresOptions::default()).unwrap();
        // Relative to ‖r₀‖ = ‖b − A x₀‖, the quantity the stopping rule uses.
        let r0_good = independent_residual(&a, &fx.b_good, &fx.x0_good);
        let res = independent_residual(&a, &fx.b_good, &good.x) / r0_good;
        if !good.termination.is_solution() || res > 1e-6 {
            failures.push(format!(
                "d={d}: good case {} residual {res:.2e}",
                good.termination.as_str()
            ));
        }
        let bad = gmres(&a, &fx.b_bad, None, Some(&fx.x0_good), &GmresOptions::default()).unwrap();
        let r0: Vec<f64> = fx
            .b_bad
            .iter()
            .zip(a.matvec(&fx.x0_good).unwrap())
            .map(|(b, ax)| b - ax)
            .collect();
        let r1: Vec<f64> = fx
            .b_bad
            .iter()
            .zip(a.matvec(&bad.x).unwrap())
            .map(|(b, ax)| b - ax)
            .collect();
        let drift = rel_diff(&r1, &r0);
        if bad.termination != Termination::BreakdownWithoutSolution || bad.breakdown_step != Some(1) || drift > 1e-10 {
            failures.push(format!(
                "d={d}: bad case {} at {:?}, ‖r1 − r0‖/‖r0‖ {drift:.2e}",
                bad.termination.as_str(),
                bad.breakdown_step
            ));
        }
        details.push(format!(
            "d={d}: index {idx}, good {} its, bad breakdown step {:?}",
            good.outer_iterations, bad.breakdown_step
        ));
    }
    check(
        failures.is_empty(),
        format!("{}; {}", details.join(", "), summary(&failures)),
    )
}

fn c12_bound() -> Outcome {
    let mut used = 0;
    let mut failures = Vec::new();
    let mut max_ratio = 0.0f64;
    for (i, f) in semiconvergent_fixtures().iter().enumerate() {
        if used == 10 {
            break;
        }
        let b = consistent_rhs(f, 400 + i as u64);
        let ell = 1 + i % 3;
        let rep = gmres(
            f.a(),
            &b,
            Some(&InnerIteration::new(&f.s, ell).unwrap()),
            None,
            &GmresOptions {
                tol: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        let bn = norm2(&b);
        let hist: Vec<f64> = rep.residual_history.iter().map(|r| r * bn).collect();
        match bound_evaluate(&f.s, ell, &hist, RadiusChoice::Nu) {
            Ok(br) => {
                used += 1;
                for (h, c) in hist.iter().zip(&br.curve) {
                    if *c > 0.0 {
                        max_ratio = max_ratio.max(h / c);
                    }
                }
                if !br.dominated {
                    failures.push(format!("{} l={ell}: violated at step {:?}", f.name, br.first_violation));
                }
            }
            Err(inner_gmres::Error::NotDiagonalizable { .. }) => continue,
            Err(e) => return Err(format!("{}: {e}", f.name)),
        }
    }
    check(
        used == 10 && failures.is_empty(),
        format!(
            "{used} diagonalizable fixtures, max residual/bound ratio {max_ratio:.3}; {}",
            summary(&failures)
        ),
    )
}

fn to_dmatrix(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

/// `Σ_{i<ℓ} Hⁱ M⁻¹` from the defining `M` and `N`, through nalgebra's LU.
fn oracle_cl(s: &Splitting, ell: usize) -> DMatrix<f64> {
    let m = to_dmatrix(&s.dense_m().unwrap());
    let n = to_dmatrix(&s.dense_n().unwrap());
    let lu = m.clone().lu();
    let minv = lu.try_inverse().expect("M nonsingular");
    let h = &minv * &n;
    let dim = m.nrows();
    let mut sum = DMatrix::zeros(dim, dim);
    let mut power = DMatrix::identity(dim, dim);
    for _ in 0..ell {
        sum += &power;
        power = &power * &h;
    }
    sum * minv
}

fn c13_oracle() -> Outcome {
    let stokes = stokes_generate(2, 1.0).unwrap();
    let (c, b) = stokes.blocks.saddle().unwrap();
    let beta = gss_default_beta(c, b).unwrap();
    let structured = structured_generate(4, 2, 0.3, 5).unwrap();
    let lap = common::laplacian(20, 10, 9);
    let mmat = common::singular_m_matrix(18, 10);

    let cases: Vec<(&str, Splitting)> = vec![
        (
            "jacobi",
            Splitting::from_kind(&lap, None, SplittingKind::Jacobi).unwrap(),
        ),
        (
            "gauss-seidel",
            Splitting::from_kind(&mmat, None, SplittingKind::GaussSeidel).unwrap(),
        ),
        (
            "sor",
            Splitting::from_kind(&lap, None, SplittingKind::Sor { omega: 1.3 }).unwrap(),
        ),
        (
            "ssor",
            Splitting::from_kind(&mmat, None, SplittingKind::Ssor { omega: 0.9 }).unwrap(),
        ),
        ("gss", Splitting::gss(c, b, 3.0, beta).unwrap()),
        ("hss", Splitting::hss(&structured.a, 0.2).unwrap()),
    ];
    let mut r = rng(13);
    let mut worst_exact = 0.0f64;
    for (name, s) in &cases {
        assert!(s.dim() <= 30, "{name} too large");
        for ell in [1, 2, 3] {
            let oracle = oracle_cl(s, ell);
            for _ in 0..3 {
                let v = random_vec(&mut r, s.dim());
                let got = s.apply_cl(&v, ell).unwrap();
                let want: Vec<f64> = (&oracle * DMatrix::from_column_slice(v.len(), 1, &v))
                    .iter()
                    .copied()
                    .collect();
                worst_exact = worst_exact.max(rel_diff(&got, &want));
            }
        }
    }

    let igss = Splitting::igss(c, b, 3.0, beta, 1e-14).unwrap();
    let ihss = Splitting::ihss(&structured.a, 0.2, 1e-14, None).unwrap();
    let mut worst_inexact = 0.0f64;
    for (inexact, exact) in [(&igss, &cases[4].1), (&ihss, &cases[5].1)] {
        for ell in [1, 2, 3] {
            let v = random_vec(&mut r, exact.dim());
            let got = inexact.apply_cl(&v, ell).map_err(|e| e.to_string())?;
            let want = exact.apply_cl(&v, ell).unwrap();
            worst_inexact = worst_inexact.max(rel_diff(&got, &want));
        }
    }
    check(
        worst_exact <= 1e-9 && worst_inexact <= 1e-6,
        format!(
            "{} exact kinds: worst {worst_exact:.2e} [≤1e-9]; inexact at tol 1e-14: worst {worst_inexact:.2e} [≤1e-6]",
            cases.len()
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "Stokes mu=1 grid 16 iteration counts", c1_stokes_mu1),
        (2, "Stokes mu=1e-5 counts and ordering", c2_stokes_mu1e5),
        (3, "alpha sweeps j=3,6,9 at q=16", c3_params),
        (4, "structured j=3 q=16 counts", c4_struct_j3),
        (5, "condition identity", c5_condition),
        (6, "no breakdown with inner iterations", c6_no_breakdown),
        (7, "flexible GMRES solutions", c7_fgmres),
        (8, "eigenvalue disk", c8_disk),
        (9, "Krylov inclusion", c9_inclusion),
        (10, "nonsingular sum and GP of I − H^l", c10_lemmas),
        (11, "planted index fixtures", c11_appendix),
        (12, "residual bound", c12_bound),
        (13, "oracle equivalence", c13_oracle),
    ];
    // `cargo test` passes harness flags; numeric arguments select criteria.
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, title, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id:>2} {status}  {title}: {detail} [{secs:.1}s]");
        if outcome.is_err() {
            failed.push(id);
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
