use crate::error::{dim_err, Error, Result};
use crate::krylov::{GmresOptions, Preconditioner, SolveReport, Termination};
use crate::matcore::vector::{all_finite, axpy, dot, norm2};
use crate::matcore::{DenseMatrix, LinearOperator};
use crate::splittings::{InnerIteration, Splitting};

/// Arnoldi basis, Hessenberg matrix and Givens data of a (F)GMRES run.
#[derive(Clone, Debug, Default)]
pub struct KrylovState {
    /// Orthonormal basis `v_1, v_2, …`.
    pub v: Vec<Vec<f64>>,
    /// Preconditioned directions `z_k`.
    pub z: Vec<Vec<f64>>,
    /// Column `k` of `H_{m+1,m}` before rotation (length `k + 2`).
    pub h: Vec<Vec<f64>>,
    /// Same columns after the Givens rotations (upper triangular `R`).
    r: Vec<Vec<f64>>,
    /// `(c_k, s_k)` with `c_k² + s_k² = 1`.
    pub givens: Vec<(f64, f64)>,
    /// Rotated right-hand side, starts as `β e₁`.
    pub g: Vec<f64>,
    pub beta: f64,
}

impl KrylovState {
    /// Dense `(m+1) × m` Hessenberg matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let m = self.h.len();
        DenseMatrix::from_fn(m + 1, m, |i, j| self.h[j].get(i).copied().unwrap_or(0.0))
    }

    /// Solves `R y = g` on the leading `m × m` block.
    fn solve_ls(&self, m: usize) -> Vec<f64> {
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = self.g[i];
            for j in i + 1..m {
                s -= self.r[j][i] * y[j];
            }
            y[i] = s / self.r[i][i];
        }
        y
    }

    fn iterate(&self, x0: &[f64], m: usize) -> Vec<f64> {
        let y = self.solve_ls(m);
        let mut x = x0.to_vec();
        for (zk, yk) in self.z.iter().zip(&y) {
            axpy(*yk, zk, &mut x);
        }
        x
    }
}

/// One modified Gram–Schmidt step: orthogonalizes `w` in place against
/// `basis` and returns `(h_{1..k,k}, ‖w‖)`.
pub fn arnoldi_step(basis: &[Vec<f64>], w: &mut [f64]) -> (Vec<f64>, f64) {
    let mut h = Vec::with_capacity(basis.len());
    for v in basis {
        let hik = dot(v, w);
        axpy(-hik, v, w);
        h.push(hik);
    }
    (h, norm2(w))
}

fn residual_norm<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x: &[f64]) -> Result<f64> {
    let ax = a.apply(x)?;
    Ok(b.iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt())
}

/// Shared outer loop. `precondition(step, v, target)` returns `(z, inner count)`;
/// `target` is `|c_{k−1}|` with `c₀ = 1`.
fn solve_core<A, F>(
    a: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &GmresOptions,
    mut precondition: F,
) -> Result<(SolveReport, KrylovState)>
where
    A: LinearOperator + ?Sized,
    F: FnMut(&[f64], f64) -> Result<(Vec<f64>, usize)>,
{
    let n = a.nrows();
    if a.ncols() != n {
        return Err(dim_err("GMRES needs a square matrix"));
    }
    if b.len() != n {
        return Err(dim_err(format!("rhs length {} for n = {n}", b.len())));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    let x0 = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if x0.len() != n {
        return Err(dim_err("x0 length"));
    }
    let maxit = opts.maxit.unwrap_or(n);

    let ax0 = a.apply(&x0)?;
    let r0: Vec<f64> = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let beta = norm2(&r0);
    let mut st = KrylovState {
        beta,
        g: vec![beta],
        ..Default::default()
    };
    let mut report = SolveReport {
        x: x0.clone(),
        outer_iterations: 0,
        relative_residual: 0.0,
        termination: Termination::Converged,
        inner_iteration_counts: Vec::new(),
        residual_history: vec![1.0],
        breakdown_step: None,
        inner_failure_step: None,
    };
    if beta == 0.0 {
        return Ok((report, st));
    }
    st.v.push(r0.iter().map(|r| r / beta).collect());

    let abs_tol = opts.tol * beta;
    let mut c_prev = 1.0f64;
    let a_norm = a.norm_estimate();
    let mut norm_est = 0.0f64;

    let finish = |st: &KrylovState, report: &mut SolveReport, m: usize, term| -> Result<()> {
        report.x = st.iterate(&x0, m);
        report.outer_iterations = st.z.len();
        report.relative_residual = residual_norm(a, b, &report.x)? / beta;
        report.termination = term;
        Ok(())
    };

    for k in 0..maxit {
        let step = k + 1;
        let (z, count) = match precondition(&st.v[k], c_prev.abs()) {
            Ok(out) => out,
            Err(Error::InnerFailure { .. }) => {
                report.inner_failure_step = Some(step);
                let m = st.z.len();
                finish(&st, &mut report, m, Termination::BreakdownWithoutSolution)?;
                return Ok((report, st));
            }
            Err(e) => return Err(e),
        };
        let mut w = a.apply(&z)?;
        if !all_finite(&z) || !all_finite(&w) {
            return Err(Error::NumericalFailure { step });
        }
        norm_est = norm_est.max(norm2(&w)).max(a_norm * norm2(&z));
        let (mut col, mut hnext) = arnoldi_step(&st.v, &mut w);
        if opts.reorthogonalize {
            let (extra, h2) = arnoldi_step(&st.v, &mut w);
            for (c, e) in col.iter_mut().zip(extra) {
                *c += e;
            }
            hnext = h2;
        }
        if !hnext.is_finite() || !all_finite(&col) {
            return Err(Error::NumericalFailure { step });
        }
        report.inner_iteration_counts.push(count);
        st.z.push(z);
        col.push(hnext);
        st.h.push(col.clone());

        let mut rcol = col;
        for (i, &(c, s)) in st.givens.iter().enumerate() {
            let (a0, a1) = (rcol[i], rcol[i + 1]);
            rcol[i] = c * a0 + s * a1;
            rcol[i + 1] = -s * a0 + c * a1;
        }
        let d = rcol[k].hypot(rcol[k + 1]);
        let (c, s) = if d == 0.0 {
            (1.0, 0.0)
        } else {
            (rcol[k] / d, rcol[k + 1] / d)
        };
        rcol[k] = d;
        rcol[k + 1] = 0.0;
        st.givens.push((c, s));
        let gk = st.g[k];
        st.g[k] = c * gk;
        st.g.push(-s * gk);
        st.r.push(rcol);
        c_prev = c;
        report.residual_history.push(st.g[k + 1].abs() / beta);

        let zero_tol = opts.breakdown_rtol * norm_est;
        if hnext <= zero_tol {
            report.breakdown_step = Some(step);
            // A vanishing diagonal of R means the last direction adds nothing.
            let m = if st.r[k][k] <= zero_tol { k } else { step };
            finish(&st, &mut report, m, Termination::BreakdownWithoutSolution)?;
            if report.relative_residual * beta <= abs_tol {
                report.termination = Termination::HappyBreakdown;
            }
            return Ok((report, st));
        }
        if st.g[k + 1].abs() <= abs_tol {
            finish(&st, &mut report, step, Termination::Converged)?;
            if report.relative_residual * beta <= abs_tol {
                return Ok((report, st));
            }
            log::debug!(
                "step {step}: recurrence {:.3e} but explicit residual {:.3e}; continuing",
                st.g[k + 1].abs() / beta,
                report.relative_residual
            );
        }
        st.v.push(w.iter().map(|x| x / hnext).collect());
    }
    let m = st.z.len();
    finish(&st, &mut report, m, Termination::MaxIterations)?;
    if report.relative_residual * beta <= abs_tol {
        report.termination = Termination::Converged;
    }
    Ok((report, st))
}

/// Right-preconditioned GMRES; `p = None` means `z_k = v_k`.
pub fn gmres<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    p: Option<&dyn Preconditioner>,
    x0: Option<&[f64]>,
    opts: &GmresOptions,
) -> Result<SolveReport> {
    gmres_with_state(a, b, p, x0, opts).map(|(r, _)| r)
}

/// [`gmres`] that also returns the final Krylov state.
pub fn gmres_with_state<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    p: Option<&dyn Preconditioner>,
    x0: Option<&[f64]>,
    opts: &GmresOptions,
) -> Result<(SolveReport, KrylovState)> {
    solve_core(a, b, x0, opts, |v, _| match p {
        Some(p) => Ok((p.apply(v)?, 1)),
        None => Ok((v.to_vec(), 0)),
    })
}

/// GMRES preconditioned by `ell` stationary steps of `s` (the fixed operator
/// `C^(ℓ)`); inner counts are recorded as `ell` per outer step.
pub fn gmres_inner<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    s: &Splitting,
    ell: usize,
    x0: Option<&[f64]>,
    opts: &GmresOptions,
) -> Result<SolveReport> {
    let inner = InnerIteration::new(s, ell)?;
    solve_core(a, b, x0, opts, |v, _| Ok((inner.apply(v)?, ell))).map(|(r, _)| r)
}

/// Flexible GMRES: at outer step `k` the preconditioner runs inner iterations
/// until `‖v_k − A z_k‖ < |c_{k−1}|` (`c₀ = 1`). If that takes more than
/// `inner_cap` iterations, the run stops as a breakdown and records the step.
pub fn fgmres<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    p: &dyn Preconditioner,
    x0: Option<&[f64]>,
    opts: &GmresOptions,
    inner_cap: usize,
) -> Result<SolveReport> {
    solve_core(a, b, x0, opts, |v, target| p.apply_adaptive(v, target, inner_cap)).map(|(r, _)| r)
}
