use serde::{Deserialize, Serialize};

use crate::analysis::spectral::{spectral_report_with, SpectralOptions};
use crate::error::{Error, Result};
use crate::matcore::linalg::{self, Complex64};
use crate::matcore::DenseMatrix;
use crate::splittings::Splitting;

/// Eigenvalue location of `A·C^(ℓ)`: `rank A` eigenvalues in the disk
/// `|λ − 1| ≤ ν(H)^ℓ`, the remaining ones at zero, and each `1 − μ^ℓ`
/// (`μ ∈ σ(H)`) present.
#[derive(Clone, Debug, Serialize)]
pub struct DiskReport {
    /// `false` when the dense budget was exceeded and nothing was computed.
    pub computed: bool,
    pub n: usize,
    pub rank: usize,
    pub nu: f64,
    pub radius: f64,
    /// Largest `|λ − 1| − ν^ℓ` over the disk eigenvalues.
    pub max_disk_excess: f64,
    /// Largest `|λ|` over the `n − rank` eigenvalues expected at zero.
    pub max_zero_modulus: f64,
    /// Largest distance in the greedy pairing `1 − μ^ℓ ↔ λ`.
    pub max_pairing_error: f64,
    pub passed: bool,
}

impl DiskReport {
    fn skipped(n: usize) -> Self {
        Self {
            computed: false,
            n,
            rank: 0,
            nu: f64::NAN,
            radius: f64::NAN,
            max_disk_excess: f64::NAN,
            max_zero_modulus: f64::NAN,
            max_pairing_error: f64::NAN,
            passed: false,
        }
    }
}

const DISK_SLACK: f64 = 1e-8;
const PAIRING_TOL: f64 = 1e-6;

pub fn disk_check(s: &Splitting, ell: usize) -> Result<DiskReport> {
    disk_check_with(s, ell, &SpectralOptions::default())
}

pub fn disk_check_with(s: &Splitting, ell: usize, opts: &SpectralOptions) -> Result<DiskReport> {
    let n = s.dim();
    if n > opts.budget {
        return Ok(DiskReport::skipped(n));
    }
    let a = s.matrix().to_dense();
    let h = s.iteration_matrix()?;
    let spec = spectral_report_with(&h, opts)?;
    let radius = spec.nu.powi(ell as i32);
    let ac = a.matmul(&s.preconditioner_matrix(ell)?)?;
    let mut lambdas = linalg::eigenvalues(&ac)?;
    let rank = linalg::rank_with(&a, opts.tol_rank)?;

    lambdas.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    let (zeros, disk) = lambdas.split_at(n - rank);
    let max_zero_modulus = zeros.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let one = Complex64::new(1.0, 0.0);
    let max_disk_excess = disk
        .iter()
        .map(|l| (l - one).norm() - radius)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut unused = lambdas.clone();
    let mut max_pairing_error = 0.0f64;
    for &(re, im) in &spec.eigenvalues {
        let target = one - Complex64::new(re, im).powu(ell as u32);
        let (k, d) = unused
            .iter()
            .enumerate()
            .map(|(k, l)| (k, (l - target).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("as many eigenvalues as columns");
        unused.swap_remove(k);
        max_pairing_error = max_pairing_error.max(d);
    }

    let passed = max_zero_modulus <= DISK_SLACK
        && (disk.is_empty() || max_disk_excess <= DISK_SLACK)
        && max_pairing_error <= PAIRING_TOL;
    Ok(DiskReport {
        computed: true,
        n,
        rank,
        nu: spec.nu,
        radius,
        max_disk_excess: if disk.is_empty() { 0.0 } else { max_disk_excess },
        max_zero_modulus,
        max_pairing_error,
        passed,
    })
}

/// Which radius enters the residual bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusChoice {
    /// `ρ(H)`; equals one for singular problems, so the bound stays flat.
    Rho,
    /// `ν(H)`, the largest modulus apart from the eigenvalue one.
    #[default]
    Nu,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub radius_choice: RadiusChoice,
    pub radius: f64,
    pub rho: f64,
    pub nu: f64,
    /// `κ(T)` of the unit-column eigenvector matrix of `A·C^(ℓ)`.
    pub kappa: f64,
    /// `κ(T) · radius^{kℓ} · ‖r₀‖` for `k = 0, 1, …`.
    pub curve: Vec<f64>,
    /// Whether every history entry lies on or below the curve.
    pub dominated: bool,
    pub first_violation: Option<usize>,
}

/// Largest eigenvector-matrix condition number accepted as diagonalizable.
pub const MAX_EIGVEC_CONDITION: f64 = 1e10;

/// Residual bound for a diagonalizable `A·C^(ℓ)` (largest Jordan block of
/// size one): `‖r_k‖ ≤ κ(T) r^{kℓ} ‖r₀‖`. `history` holds absolute residual
/// norms with `‖r₀‖` first.
pub fn bound_evaluate(s: &Splitting, ell: usize, history: &[f64], choice: RadiusChoice) -> Result<BoundReport> {
    let opts = SpectralOptions::default();
    let n = s.dim();
    if n > opts.budget {
        return Err(Error::BudgetExceeded { n, budget: opts.budget });
    }
    if history.is_empty() {
        return Err(Error::InvalidArgument("empty residual history".into()));
    }
    let a = s.matrix().to_dense();
    let spec = spectral_report_with(&s.iteration_matrix()?, &opts)?;
    let ac = a.matmul(&s.preconditioner_matrix(ell)?)?;
    let kappa = eigvec_condition(&ac)?;
    let radius = match choice {
        RadiusChoice::Rho => spec.rho,
        RadiusChoice::Nu => spec.nu,
    };
    let r0 = history[0];
    let curve: Vec<f64> = (0..history.len())
        .map(|k| kappa * radius.powi((k * ell) as i32) * r0)
        .collect();
    // Rounding in a converged residual is not a violation.
    let slack = 1e-12 * r0;
    let first_violation = history
        .iter()
        .zip(&curve)
        .position(|(h, c)| *h > c * (1.0 + 1e-10) + slack);
    Ok(BoundReport {
        radius_choice: choice,
        radius,
        rho: spec.rho,
        nu: spec.nu,
        kappa,
        curve,
        dominated: first_violation.is_none(),
        first_violation,
    })
}

fn eigvec_condition(m: &DenseMatrix) -> Result<f64> {
    let kappa = linalg::eigen_decomposition(m, 1e-8)?.condition();
    if !(kappa <= MAX_EIGVEC_CONDITION) {
        return Err(Error::NotDiagonalizable { condition: kappa });
    }
    Ok(kappa)
}
