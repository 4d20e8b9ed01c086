//! Stationary splittings `A = M − N` and the inner-iteration preconditioner
//! `C^(ℓ) = Σ_{i<ℓ} Hⁱ M⁻¹` they induce (`H = M⁻¹N`).
//!
//! `C^(ℓ) v` is computed by `ℓ` steps `z⁽ⁱ⁺¹⁾ = H z⁽ⁱ⁾ + M⁻¹ v` from `z⁽⁰⁾ = 0`.

pub mod inner;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::krylov::{gmres, GmresOptions, Preconditioner};
use crate::matcore::vector::{norm2, rel_diff};
use crate::matcore::{block, chol_factor, linalg, lu_factor, DenseMatrix, Factorization, SparseMatrix};

/// Splitting descriptor, serializable in experiment configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplittingKind {
    Jacobi,
    GaussSeidel,
    Sor {
        omega: f64,
    },
    Ssor {
        omega: f64,
    },
    Gss {
        alpha: f64,
        beta: f64,
    },
    Igss {
        alpha: f64,
        beta: f64,
        inner_tol: f64,
    },
    Hss {
        alpha: f64,
    },
    Ihss {
        alpha: f64,
        inner_tol: f64,
        inner_maxit: Option<usize>,
    },
}

impl SplittingKind {
    pub fn is_exact(&self) -> bool {
        !matches!(self, SplittingKind::Igss { .. } | SplittingKind::Ihss { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SplittingKind::Jacobi => "jacobi",
            SplittingKind::GaussSeidel => "gauss-seidel",
            SplittingKind::Sor { .. } => "sor",
            SplittingKind::Ssor { .. } => "ssor",
            SplittingKind::Gss { .. } => "gss",
            SplittingKind::Igss { .. } => "igss",
            SplittingKind::Hss { .. } => "hss",
            SplittingKind::Ihss { .. } => "ihss",
        }
    }

    /// Shift parameter `α` of the GSS/HSS families.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            SplittingKind::Gss { alpha, .. }
            | SplittingKind::Igss { alpha, .. }
            | SplittingKind::Hss { alpha }
            | SplittingKind::Ihss { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Same descriptor with `α` replaced (no-op for kinds without `α`).
    pub fn with_alpha(mut self, new: f64) -> Self {
        match &mut self {
            SplittingKind::Gss { alpha, .. }
            | SplittingKind::Igss { alpha, .. }
            | SplittingKind::Hss { alpha }
            | SplittingKind::Ihss { alpha, .. } => *alpha = new,
            _ => {}
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClassicKind {
    Jacobi,
    GaussSeidel,
    Sor(f64),
    Ssor(f64),
}

#[derive(Clone, Debug)]
enum Imp {
    /// Jacobi / Gauss–Seidel / SOR / SSOR sweeps directly on `A`.
    Classic {
        diag: Vec<f64>,
    },
    Gss {
        m: SparseMatrix,
        n: SparseMatrix,
        m_lu: Factorization,
    },
    Igss {
        m: SparseMatrix,
        tol: f64,
    },
    Hss {
        alpha: f64,
        herm: SparseMatrix,
        skew: SparseMatrix,
        chol: Factorization,
        lu: Factorization,
    },
    Ihss {
        alpha: f64,
        herm: SparseMatrix,
        skew: SparseMatrix,
        herm_shift: SparseMatrix,
        skew_shift: SparseMatrix,
        skew_shift_t: SparseMatrix,
        tol: f64,
        maxit: usize,
    },
}

/// An immutable splitting of `A`, ready for repeated stationary steps.
#[derive(Clone, Debug)]
pub struct Splitting {
    a: SparseMatrix,
    kind: SplittingKind,
    imp: Imp,
}

/// Outcome of [`Splitting::stationary_run`].
#[derive(Clone, Debug)]
pub struct InnerRunReport {
    pub z: Vec<f64>,
    pub steps_used: usize,
    /// `‖z⁽ⁱ⁻¹⁾ − z⁽ⁱ⁾‖ / ‖z⁽ⁱ⁾‖` at the last step (0 if no step was taken).
    pub relative_change: f64,
    /// `‖b − A z‖ / ‖b‖`.
    pub final_inner_residual: f64,
}

fn check_alpha(alpha: f64, name: &str) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {alpha}")))
    }
}

/// Saddle-point matrix `[[C, Bᵀ], [−B, O]]` with `C` `p × p`, `B` `q × p`.
pub fn saddle_matrix(c: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    if !c.is_square() || b.cols() != c.rows() {
        return Err(dim_err("saddle: C must be p×p and B q×p"));
    }
    let bt = b.transpose();
    let nb = b.scaled(-1.0);
    let o = SparseMatrix::zeros(b.rows(), b.rows());
    block(&[vec![Some(c), Some(&bt)], vec![Some(&nb), Some(&o)]])
}

fn gss_m(c: &SparseMatrix, b: &SparseMatrix, alpha: f64, beta: f64) -> Result<SparseMatrix> {
    let bt = b.transpose();
    let nb = b.scaled(-1.0);
    let c_shift = c.shifted(alpha);
    let beta_i = SparseMatrix::identity(b.rows()).scaled(beta);
    Ok(block(&[vec![Some(&c_shift), Some(&bt)], vec![Some(&nb), Some(&beta_i)]])?.scaled(0.5))
}

fn sym_skew(a: &SparseMatrix) -> Result<(SparseMatrix, SparseMatrix)> {
    let at = a.transpose();
    Ok((a.lin_comb(0.5, &at, 0.5)?, a.lin_comb(0.5, &at, -0.5)?))
}

impl Splitting {
    /// Builds any splitting from its descriptor. The GSS family needs the
    /// saddle blocks `(C, B)`; the others only use `a`.
    pub fn from_kind(
        a: &SparseMatrix,
        saddle: Option<(&SparseMatrix, &SparseMatrix)>,
        kind: SplittingKind,
    ) -> Result<Self> {
        let blocks = || {
            saddle.ok_or_else(|| Error::InvalidArgument(format!("{} needs a [[C, Bᵀ], [−B, O]] problem", kind.label())))
        };
        match kind {
            SplittingKind::Jacobi => Self::classic(a, ClassicKind::Jacobi),
            SplittingKind::GaussSeidel => Self::classic(a, ClassicKind::GaussSeidel),
            SplittingKind::Sor { omega } => Self::classic(a, ClassicKind::Sor(omega)),
            SplittingKind::Ssor { omega } => Self::classic(a, ClassicKind::Ssor(omega)),
            SplittingKind::Gss { alpha, beta } => {
                let (c, b) = blocks()?;
                Self::gss(c, b, alpha, beta)
            }
            SplittingKind::Igss { alpha, beta, inner_tol } => {
                let (c, b) = blocks()?;
                Self::igss(c, b, alpha, beta, inner_tol)
            }
            SplittingKind::Hss { alpha } => Self::hss(a, alpha),
            SplittingKind::Ihss {
                alpha,
                inner_tol,
                inner_maxit,
            } => Self::ihss(a, alpha, inner_tol, inner_maxit),
        }
    }

    /// Jacobi, Gauss–Seidel, SOR or SSOR splitting of a square `A`.
    pub fn classic(a: &SparseMatrix, kind: ClassicKind) -> Result<Self> {
        if !a.is_square() {
            return Err(dim_err("splitting needs a square matrix"));
        }
        let diag = a.diagonal();
        if let Some(row) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        let kind = match kind {
            ClassicKind::Jacobi => SplittingKind::Jacobi,
            ClassicKind::GaussSeidel => SplittingKind::GaussSeidel,
            ClassicKind::Sor(w) | ClassicKind::Ssor(w) => {
                if !(w > 0.0 && w < 2.0) {
                    return Err(Error::InvalidArgument(format!("omega must lie in (0, 2), got {w}")));
                }
                if matches!(kind, ClassicKind::Sor(_)) {
                    SplittingKind::Sor { omega: w }
                } else {
                    SplittingKind::Ssor { omega: w }
                }
            }
        };
        Ok(Self {
            a: a.clone(),
            kind,
            imp: Imp::Classic { diag },
        })
    }

    /// Generalized shifted splitting of `[[C, Bᵀ], [−B, O]]`:
    /// `M = ½[[αI + C, Bᵀ], [−B, βI]]`, `N = M − A`. `M` is factored once.
    pub fn gss(c: &SparseMatrix, b: &SparseMatrix, alpha: f64, beta: f64) -> Result<Self> {
        check_alpha(alpha, "alpha")?;
        check_alpha(beta, "beta")?;
        let a = saddle_matrix(c, b)?;
        let m = gss_m(c, b, alpha, beta)?;
        let n = m.sub(&a)?;
        let m_lu = lu_factor(&m.to_dense())?;
        Ok(Self {
            a,
            kind: SplittingKind::Gss { alpha, beta },
            imp: Imp::Gss { m, n, m_lu },
        })
    }

    /// Inexact GSS: each step is `z + d` with `M d = v − A z` solved by
    /// unpreconditioned GMRES to relative residual `inner_tol` (at most `n`
    /// steps).
    pub fn igss(c: &SparseMatrix, b: &SparseMatrix, alpha: f64, beta: f64, inner_tol: f64) -> Result<Self> {
        check_alpha(alpha, "alpha")?;
        check_alpha(beta, "beta")?;
        check_alpha(inner_tol, "inner_tol")?;
        let a = saddle_matrix(c, b)?;
        let m = gss_m(c, b, alpha, beta)?;
        Ok(Self {
            a,
            kind: SplittingKind::Igss { alpha, beta, inner_tol },
            imp: Imp::Igss { m, tol: inner_tol },
        })
    }

    /// Hermitian/skew-Hermitian splitting; one step is the two half steps
    /// through `αI + 𝓗` (Cholesky) and `αI + 𝓢` (LU).
    pub fn hss(a: &SparseMatrix, alpha: f64) -> Result<Self> {
        check_alpha(alpha, "alpha")?;
        if !a.is_square() {
            return Err(dim_err("splitting needs a square matrix"));
        }
        let (herm, skew) = sym_skew(a)?;
        let chol = chol_factor(&herm.shifted(alpha).to_dense())?;
        let lu = lu_factor(&skew.shifted(alpha).to_dense())?;
        Ok(Self {
            a: a.clone(),
            kind: SplittingKind::Hss { alpha },
            imp: Imp::Hss {
                alpha,
                herm,
                skew,
                chol,
                lu,
            },
        })
    }

    /// Inexact HSS: each half step adds a correction `(αI + 𝓗) d = v − A z`
    /// (CG), then `(αI + 𝓢) d = v − A z` (LSQR), both to relative residual
    /// `inner_tol` and at most `inner_maxit` (default `n`) iterations.
    pub fn ihss(a: &SparseMatrix, alpha: f64, inner_tol: f64, inner_maxit: Option<usize>) -> Result<Self> {
        check_alpha(alpha, "alpha")?;
        check_alpha(inner_tol, "inner_tol")?;
        if !a.is_square() {
            return Err(dim_err("splitting needs a square matrix"));
        }
        let (herm, skew) = sym_skew(a)?;
        let herm_shift = herm.shifted(alpha);
        let skew_shift = skew.shifted(alpha);
        let skew_shift_t = skew_shift.transpose();
        Ok(Self {
            a: a.clone(),
            kind: SplittingKind::Ihss {
                alpha,
                inner_tol,
                inner_maxit,
            },
            imp: Imp::Ihss {
                alpha,
                herm,
                skew,
                herm_shift,
                skew_shift,
                skew_shift_t,
                tol: inner_tol,
                maxit: inner_maxit.unwrap_or(a.rows()),
            },
        })
    }

    pub fn kind(&self) -> SplittingKind {
        self.kind
    }

    pub fn is_exact(&self) -> bool {
        self.kind.is_exact()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// One stationary step `z⁺ = H z + M⁻¹ v`.
    pub fn step(&self, z: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if z.len() != n || v.len() != n {
            return Err(dim_err(format!("step: n = {n}, got {} and {}", z.len(), v.len())));
        }
        match &self.imp {
            Imp::Classic { diag } => Ok(self.classic_step(diag, z, v)),
            Imp::Gss { n: nmat, m_lu, .. } => {
                let mut rhs = nmat.matvec(z)?;
                rhs.iter_mut().zip(v).for_each(|(r, vi)| *r += vi);
                m_lu.solve(&rhs)
            }
            Imp::Igss { m, tol, .. } => {
                // Correction form: z + M⁻¹(v − A z) with M⁻¹ applied inexactly,
                // so the inner error shrinks with the residual.
                let r = residual(&self.a, z, v)?;
                let opts = GmresOptions {
                    tol: *tol,
                    maxit: Some(n),
                    ..Default::default()
                };
                let rep = gmres(m, &r, None, None, &opts)?;
                if rep.termination.is_solution() {
                    Ok(add(z, &rep.x))
                } else {
                    Err(Error::InnerFailure {
                        solver: "inner GMRES",
                        iterations: rep.outer_iterations,
                        tol: *tol,
                        residual: rep.relative_residual,
                    })
                }
            }
            Imp::Hss {
                alpha,
                herm,
                skew,
                chol,
                lu,
            } => {
                let rhs1 = shifted_apply(skew, -1.0, *alpha, z, v)?;
                let half = chol.solve(&rhs1)?;
                let rhs2 = shifted_apply(herm, -1.0, *alpha, &half, v)?;
                lu.solve(&rhs2)
            }
            Imp::Ihss {
                herm_shift,
                skew_shift,
                skew_shift_t,
                tol,
                maxit,
                ..
            } => {
                // Both half steps in correction form, each driven by the
                // current residual.
                let d1 = inner::cg(herm_shift, &residual(&self.a, z, v)?, *tol, *maxit)?.x;
                let half = add(z, &d1);
                let d2 = inner::lsqr(skew_shift, skew_shift_t, &residual(&self.a, &half, v)?, *tol, *maxit)?.x;
                Ok(add(&half, &d2))
            }
        }
    }

    fn classic_step(&self, diag: &[f64], z: &[f64], v: &[f64]) -> Vec<f64> {
        let a = &self.a;
        match self.kind {
            SplittingKind::Jacobi => (0..z.len())
                .map(|i| {
                    let (c, vals) = a.row(i);
                    let az: f64 = c.iter().zip(vals).map(|(&j, &x)| x * z[j]).sum();
                    z[i] + (v[i] - az) / diag[i]
                })
                .collect(),
            SplittingKind::GaussSeidel => sor_sweep(a, diag, 1.0, z.to_vec(), v, false),
            SplittingKind::Sor { omega } => sor_sweep(a, diag, omega, z.to_vec(), v, false),
            SplittingKind::Ssor { omega } => {
                let half = sor_sweep(a, diag, omega, z.to_vec(), v, false);
                sor_sweep(a, diag, omega, half, v, true)
            }
            _ => unreachable!("classic step on a non-classic splitting"),
        }
    }

    /// `M⁻¹ v` (inexact for the inexact variants).
    pub fn solve_m(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.step(&vec![0.0; self.dim()], v)
    }

    /// `C^(ℓ) v`: `ℓ` steps from the zero vector.
    pub fn apply_cl(&self, v: &[f64], ell: usize) -> Result<Vec<f64>> {
        if ell == 0 {
            return Err(Error::InvalidArgument("ell must be at least 1".into()));
        }
        let mut z = vec![0.0; self.dim()];
        for _ in 0..ell {
            z = self.step(&z, v)?;
        }
        Ok(z)
    }

    /// Plain stationary iteration for `A z = b` from `z0`.
    pub fn stationary_run(&self, b: &[f64], z0: &[f64], steps: usize) -> Result<InnerRunReport> {
        let mut z = z0.to_vec();
        let mut change = 0.0;
        for _ in 0..steps {
            let next = self.step(&z, b)?;
            change = relative_change(&z, &next);
            z = next;
        }
        let az = self.a.matvec(&z)?;
        let bn = norm2(b);
        let res = norm2(&b.iter().zip(&az).map(|(x, y)| x - y).collect::<Vec<_>>());
        Ok(InnerRunReport {
            z,
            steps_used: steps,
            relative_change: change,
            final_inner_residual: if bn > 0.0 { res / bn } else { res },
        })
    }

    fn require_exact(&self) -> Result<()> {
        if self.is_exact() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{} is inexact and has no fixed iteration matrix",
                self.kind.label()
            )))
        }
    }

    fn dense_columns(&self, f: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync) -> Result<DenseMatrix> {
        self.require_exact()?;
        let n = self.dim();
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                f(&e)
            })
            .collect::<Result<_>>()?;
        DenseMatrix::from_columns(&cols)
    }

    /// Dense `H = M⁻¹ N`, built column by column from `H e_j = step(e_j, 0)`.
    pub fn iteration_matrix(&self) -> Result<DenseMatrix> {
        let zero = vec![0.0; self.dim()];
        self.dense_columns(|e| self.step(e, &zero))
    }

    /// Dense `M⁻¹`.
    pub fn m_inverse_matrix(&self) -> Result<DenseMatrix> {
        self.dense_columns(|e| self.solve_m(e))
    }

    /// Dense `C^(ℓ)`.
    pub fn preconditioner_matrix(&self, ell: usize) -> Result<DenseMatrix> {
        self.dense_columns(|e| self.apply_cl(e, ell))
    }

    /// Dense `M` from its defining formula.
    pub fn dense_m(&self) -> Result<DenseMatrix> {
        let a = self.a.to_dense();
        let n = a.rows();
        Ok(match (&self.imp, self.kind) {
            (Imp::Gss { m, .. } | Imp::Igss { m, .. }, _) => m.to_dense(),
            (Imp::Hss { alpha, herm, skew, .. } | Imp::Ihss { alpha, herm, skew, .. }, _) => herm
                .shifted(*alpha)
                .to_dense()
                .matmul(&skew.shifted(*alpha).to_dense())?
                .scaled(0.5 / alpha),
            (Imp::Classic { diag }, kind) => {
                let lower = |w: f64| {
                    DenseMatrix::from_fn(n, n, |i, j| {
                        if j < i {
                            w * a.get(i, j)
                        } else if i == j {
                            diag[i]
                        } else {
                            0.0
                        }
                    })
                };
                let upper = |w: f64| {
                    DenseMatrix::from_fn(n, n, |i, j| {
                        if j > i {
                            w * a.get(i, j)
                        } else if i == j {
                            diag[i]
                        } else {
                            0.0
                        }
                    })
                };
                match kind {
                    SplittingKind::Jacobi => DenseMatrix::from_diag(diag),
                    SplittingKind::GaussSeidel => lower(1.0),
                    SplittingKind::Sor { omega } => lower(omega).scaled(1.0 / omega),
                    SplittingKind::Ssor { omega } => {
                        let dinv = DenseMatrix::from_diag(&diag.iter().map(|d| 1.0 / d).collect::<Vec<_>>());
                        lower(omega)
                            .matmul(&dinv)?
                            .matmul(&upper(omega))?
                            .scaled(1.0 / (omega * (2.0 - omega)))
                    }
                    _ => unreachable!(),
                }
            }
        })
    }

    /// Dense `N = M − A`.
    pub fn dense_n(&self) -> Result<DenseMatrix> {
        self.dense_m()?.sub(&self.a.to_dense())
    }
}

fn relative_change(prev: &[f64], next: &[f64]) -> f64 {
    let nn = norm2(next);
    if nn == 0.0 {
        if norm2(prev) == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        rel_diff(prev, next)
    }
}

/// `v − A z`.
fn residual(a: &SparseMatrix, z: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let az = a.matvec(z)?;
    Ok(v.iter().zip(&az).map(|(vi, ai)| vi - ai).collect())
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// `s·(X z) + α z + v`.
fn shifted_apply(x: &SparseMatrix, s: f64, alpha: f64, z: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let xz = x.matvec(z)?;
    Ok(xz
        .iter()
        .zip(z)
        .zip(v)
        .map(|((p, zi), vi)| s * p + alpha * zi + vi)
        .collect())
}

/// One SOR sweep `(D + ωL) z⁺ = ω v + ((1−ω)D − ωU) z`, or the backward
/// sweep with the roles of `L` and `U` exchanged.
fn sor_sweep(a: &SparseMatrix, diag: &[f64], omega: f64, mut z: Vec<f64>, v: &[f64], backward: bool) -> Vec<f64> {
    let n = z.len();
    let mut update = |i: usize| {
        let (c, vals) = a.row(i);
        let mut off = 0.0;
        for (&j, &x) in c.iter().zip(vals) {
            if j != i {
                off += x * z[j];
            }
        }
        z[i] = (omega * (v[i] - off) + (1.0 - omega) * diag[i] * z[i]) / diag[i];
    };
    if backward {
        (0..n).rev().for_each(&mut update);
    } else {
        (0..n).for_each(&mut update);
    }
    z
}

/// `C^(ℓ)` as a [`Preconditioner`]; the adaptive form keeps stepping until the
/// inner residual target is met.
pub struct InnerIteration<'a> {
    splitting: &'a Splitting,
    ell: usize,
}

impl<'a> InnerIteration<'a> {
    pub fn new(splitting: &'a Splitting, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidArgument("ell must be at least 1".into()));
        }
        Ok(Self { splitting, ell })
    }

    pub fn adaptive(splitting: &'a Splitting) -> Self {
        Self { splitting, ell: 1 }
    }
}

impl Preconditioner for InnerIteration<'_> {
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.splitting.apply_cl(v, self.ell)
    }

    fn apply_adaptive(&self, v: &[f64], target: f64, cap: usize) -> Result<(Vec<f64>, usize)> {
        let a = self.splitting.matrix();
        let mut z = vec![0.0; v.len()];
        let mut res = norm2(v);
        for i in 1..=cap {
            z = self.splitting.step(&z, v)?;
            let az = a.matvec(&z)?;
            res = v.iter().zip(&az).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if res < target {
                return Ok((z, i));
            }
        }
        Err(Error::InnerFailure {
            solver: "inner iteration",
            iterations: cap,
            tol: target,
            residual: res,
        })
    }
}

/// `β = ‖B‖² / ‖C‖` with spectral norms.
pub fn gss_default_beta(c: &SparseMatrix, b: &SparseMatrix) -> Result<f64> {
    let nb = linalg::spectral_norm(b)?;
    let nc = linalg::spectral_norm(c)?;
    if nc == 0.0 {
        return Err(Error::InvalidArgument("‖C‖ = 0".into()));
    }
    Ok(nb * nb / nc)
}
