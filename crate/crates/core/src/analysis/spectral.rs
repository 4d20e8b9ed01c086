use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::linalg::{self, Complex64, RANK_RTOL};
use crate::matcore::DenseMatrix;
use crate::problems::DENSE_BUDGET;

/// Tolerances shared by the spectral predicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralOptions {
    /// `λ` counts as the eigenvalue one when `|λ − 1| ≤ tol_one`.
    pub tol_one: f64,
    /// Relative rank threshold (`σ ≤ tol_rank · σ_max` is zero).
    pub tol_rank: f64,
    /// Largest dimension for dense eigensolves.
    pub budget: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tol_one: 1e-8,
            tol_rank: RANK_RTOL,
            budget: DENSE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub rho: f64,
    /// Largest modulus among eigenvalues not within `tol_one` of one.
    pub nu: f64,
    pub semiconvergent: bool,
    /// Algebraic and geometric multiplicity of the eigenvalue one.
    pub one_multiplicity: (usize, usize),
    pub tol_one: f64,
    pub tol_rank: f64,
}

pub fn spectral_report(h: &DenseMatrix, tol_one: f64) -> Result<SpectralReport> {
    spectral_report_with(
        h,
        &SpectralOptions {
            tol_one,
            ..Default::default()
        },
    )
}

/// Semiconvergence verdict for an iteration matrix: `ρ(H) ≤ 1`, the only
/// eigenvalue on the unit circle is one, and one is semisimple.
pub fn spectral_report_with(h: &DenseMatrix, opts: &SpectralOptions) -> Result<SpectralReport> {
    let n = h.rows();
    if n > opts.budget {
        return Err(Error::BudgetExceeded { n, budget: opts.budget });
    }
    let values = linalg::eigenvalues(h)?;
    let tol = opts.tol_one;
    let is_one = |l: &Complex64| (l - Complex64::new(1.0, 0.0)).norm() <= tol;
    let rho = values.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let nu = values
        .iter()
        .filter(|l| !is_one(l))
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    let algebraic = values.iter().filter(|l| is_one(l)).count();

    let (geometric, semisimple) = if algebraic == 0 {
        (0, true)
    } else {
        let ih = DenseMatrix::identity(n).sub(h)?;
        let r1 = linalg::rank_with(&ih, opts.tol_rank)?;
        let r2 = linalg::rank_with(&ih.matmul(&ih)?, opts.tol_rank)?;
        (n - r1, r1 == r2)
    };
    // Off the eigenvalue one, nothing may reach the unit circle.
    let semiconvergent = rho <= 1.0 + tol && nu < 1.0 - tol && semisimple;
    Ok(SpectralReport {
        eigenvalues: values.iter().map(|l| (l.re, l.im)).collect(),
        rho,
        nu,
        semiconvergent,
        one_multiplicity: (algebraic, geometric),
        tol_one: tol,
        tol_rank: opts.tol_rank,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub index: usize,
    /// `rank A⁰, rank A¹, …` up to the first repeat.
    pub rank_sequence: Vec<usize>,
    pub is_gp: bool,
}

/// `rank A = rank A²`, i.e. `N(A) ∩ R(A) = {0}`.
pub fn gp_test(a: &DenseMatrix) -> Result<bool> {
    if !a.is_square() {
        return Err(crate::error::dim_err("GP test of a non-square matrix"));
    }
    Ok(linalg::rank_with(a, RANK_RTOL)? == linalg::rank_with(&a.matmul(a)?, RANK_RTOL)?)
}

/// Smallest `d` with `rank A^d = rank A^{d+1}`, searched up to `dmax`.
pub fn index_of(a: &DenseMatrix, dmax: usize) -> Result<IndexReport> {
    index_of_with(a, dmax, RANK_RTOL)
}

pub fn index_of_with(a: &DenseMatrix, dmax: usize, tol_rank: f64) -> Result<IndexReport> {
    if !a.is_square() {
        return Err(crate::error::dim_err("index of a non-square matrix"));
    }
    let n = a.rows();
    let mut ranks = vec![n];
    let mut power = DenseMatrix::identity(n);
    for d in 0..=dmax {
        power = power.matmul(a)?;
        let r = linalg::rank_with(&power, tol_rank)?;
        ranks.push(r);
        if r == ranks[d] {
            ranks.pop();
            return Ok(IndexReport {
                index: d,
                is_gp: d <= 1,
                rank_sequence: ranks,
            });
        }
    }
    Err(Error::IndexNotStabilized { dmax, ranks })
}
