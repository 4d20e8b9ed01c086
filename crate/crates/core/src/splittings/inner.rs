//! Inner Krylov solvers for the inexact splittings: CG for the shifted
//! symmetric part, LSQR for the shifted skew part.

use crate::error::{Error, Result};
use crate::matcore::vector::{axpy, dot, norm2};
use crate::matcore::SparseMatrix;

/// Result of an inner solve.
#[derive(Clone, Debug)]
pub struct InnerSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` as tracked by the solver.
    pub relative_residual: f64,
}

/// Conjugate gradients from `x₀ = 0`, stopping at `‖r‖ ≤ tol ‖b‖`.
pub fn cg(a: &SparseMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<InnerSolve> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(InnerSolve {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    for it in 1..=maxit {
        a.matvec_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd { column: it });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / bnorm;
        if rel <= tol {
            return Ok(InnerSolve {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::InnerFailure {
        solver: "CG",
        iterations: maxit,
        tol,
        residual: rr.sqrt() / bnorm,
    })
}

/// LSQR (Paige–Saunders) from `x₀ = 0`, stopping when the residual estimate
/// satisfies `‖r‖ ≤ tol ‖b‖`. `at` must be the transpose of `a`.
pub fn lsqr(a: &SparseMatrix, at: &SparseMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<InnerSolve> {
    let n = a.cols();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(InnerSolve {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut beta = bnorm;
    let mut u: Vec<f64> = b.iter().map(|v| v / beta).collect();
    let mut v = at.matvec(&u)?;
    let mut alpha = norm2(&v);
    if alpha == 0.0 {
        // b ⟂ R(A): x = 0 is the least-squares solution.
        return Ok(InnerSolve {
            x,
            iterations: 0,
            relative_residual: 1.0,
        });
    }
    v.iter_mut().for_each(|e| *e /= alpha);
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    for it in 1..=maxit {
        let av = a.matvec(&v)?;
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        beta = norm2(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|e| *e /= beta);
            let atu = at.matvec(&u)?;
            for (vi, ai) in v.iter_mut().zip(&atu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm2(&v);
            if alpha > 0.0 {
                v.iter_mut().for_each(|e| *e /= alpha);
            }
        } else {
            alpha = 0.0;
        }
        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;
        axpy(phi / rho, &w, &mut x);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = vi - (theta / rho) * *wi;
        }
        let rel = phibar.abs() / bnorm;
        if rel <= tol || beta == 0.0 || alpha == 0.0 {
            return Ok(InnerSolve {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
    }
    Err(Error::InnerFailure {
        solver: "LSQR",
        iterations: maxit,
        tol,
        residual: phibar.abs() / bnorm,
    })
}
