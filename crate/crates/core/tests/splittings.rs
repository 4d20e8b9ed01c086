mod common;

use inner_gmres::matcore::vector::rel_diff;
use inner_gmres::matcore::{lu_factor, DenseMatrix, SparseMatrix};
use inner_gmres::problems::stokes_generate;
use inner_gmres::splittings::inner::{cg, lsqr};
use inner_gmres::splittings::{gss_default_beta, ClassicKind, Splitting};
use proptest::prelude::*;

fn diag_dominant(n: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |e| {
        let d = DenseMatrix::from_fn(n, n, |i, j| {
            let v = if (i + 2 * j) % 3 == 0 { e[i * n + j] } else { 0.0 };
            v + if i == j { n as f64 } else { 0.0 }
        });
        SparseMatrix::from_dense(&d)
    })
}

fn kinds() -> impl Strategy<Value = ClassicKind> {
    prop_oneof![
        Just(ClassicKind::Jacobi),
        Just(ClassicKind::GaussSeidel),
        (0.2f64..1.8).prop_map(ClassicKind::Sor),
        (0.2f64..1.8).prop_map(ClassicKind::Ssor),
    ]
}

/// `H z + M⁻¹ v` from the dense `M` and `N`.
fn dense_step(s: &Splitting, z: &[f64], v: &[f64]) -> Vec<f64> {
    let m = s.dense_m().unwrap();
    let nz = s.dense_n().unwrap().matvec(z).unwrap();
    let rhs: Vec<f64> = nz.iter().zip(v).map(|(a, b)| a + b).collect();
    lu_factor(&m).unwrap().solve(&rhs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classic_step_matches_definition(
        (a, z, v) in (2usize..10).prop_flat_map(|n| {
            (diag_dominant(n), prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n))
        }),
        kind in kinds()
    ) {
        let s = Splitting::classic(&a, kind).unwrap();
        prop_assert!(rel_diff(&s.step(&z, &v).unwrap(), &dense_step(&s, &z, &v)) <= 1e-11);
        // M − N = A.
        let diff = s.dense_m().unwrap().sub(&s.dense_n().unwrap()).unwrap();
        prop_assert!(diff.sub(&a.to_dense()).unwrap().norm_max() <= 1e-12);
    }

    #[test]
    fn inner_preconditioner_is_linear(
        alpha in 0.5f64..20.0,
        ell in 1usize..5,
        c1 in -2.0f64..2.0,
        seed in any::<u64>()
    ) {
        let p = stokes_generate(2, 1.0).unwrap();
        let (c, b) = p.blocks.saddle().unwrap();
        let s = Splitting::gss(c, b, alpha, gss_default_beta(c, b).unwrap()).unwrap();
        let mut r = common::rng(seed);
        let v = common::random_vec(&mut r, s.dim());
        let w = common::random_vec(&mut r, s.dim());
        let comb: Vec<f64> = v.iter().zip(&w).map(|(x, y)| c1 * x + y).collect();
        let lhs = s.apply_cl(&comb, ell).unwrap();
        let cv = s.apply_cl(&v, ell).unwrap();
        let cw = s.apply_cl(&w, ell).unwrap();
        let rhs: Vec<f64> = cv.iter().zip(&cw).map(|(x, y)| c1 * x + y).collect();
        prop_assert!(rel_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn hss_step_matches_definition(alpha in 0.05f64..5.0, seed in any::<u64>()) {
        // Semidefinite symmetric part plus a random skew part.
        let w = common::singular_m_matrix(12, seed);
        let a = common::laplacian(12, 6, seed).add(&w.sub(&w.transpose()).unwrap()).unwrap();
        let s = Splitting::hss(&a, alpha).unwrap();
        let mut r = common::rng(seed ^ 1);
        let z = common::random_vec(&mut r, 12);
        let v = common::random_vec(&mut r, 12);
        prop_assert!(rel_diff(&s.step(&z, &v).unwrap(), &dense_step(&s, &z, &v)) <= 1e-10);
    }
}

#[test]
fn cg_and_lsqr_reach_tolerance() {
    let a = common::laplacian(20, 10, 3).shifted(0.5);
    let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
    let sol = cg(&a, &b, 1e-10, 200).unwrap();
    let r: Vec<f64> = b.iter().zip(a.matvec(&sol.x).unwrap()).map(|(p, q)| p - q).collect();
    assert!(inner_gmres::matcore::vector::norm2(&r) <= 1.01e-10 * inner_gmres::matcore::vector::norm2(&b));

    let m = common::singular_m_matrix(15, 4).shifted(1.0);
    let b: Vec<f64> = (0..15).map(|i| (i as f64).cos()).collect();
    let sol = lsqr(&m, &m.transpose(), &b, 1e-10, 500).unwrap();
    let r: Vec<f64> = b.iter().zip(m.matvec(&sol.x).unwrap()).map(|(p, q)| p - q).collect();
    assert!(inner_gmres::matcore::vector::norm2(&r) <= 1e-8 * inner_gmres::matcore::vector::norm2(&b));
}

#[test]
fn inner_cap_yields_inner_failure() {
    let a = common::laplacian(30, 10, 5).shifted(1e-3);
    let b = vec![1.0; 30];
    assert!(matches!(
        cg(&a, &b, 1e-14, 2),
        Err(inner_gmres::Error::InnerFailure { .. })
    ));
}

#[test]
fn invalid_parameters_are_rejected() {
    let a = SparseMatrix::identity(3);
    assert!(Splitting::classic(&a, ClassicKind::Sor(2.0)).is_err());
    assert!(Splitting::hss(&a, 0.0).is_err());
    let zero_diag = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    assert!(matches!(
        Splitting::classic(&zero_diag, ClassicKind::Jacobi),
        Err(inner_gmres::Error::ZeroDiagonal { row: 0 })
    ));
}

#[test]
fn inexact_kinds_have_no_iteration_matrix() {
    let p = stokes_generate(2, 1.0).unwrap();
    let (c, b) = p.blocks.saddle().unwrap();
    let s = Splitting::igss(c, b, 2.0, 1.0, 0.1).unwrap();
    assert!(!s.is_exact());
    assert!(s.iteration_matrix().is_err());
}
