//! Dense spectral routines (eigenvalues, SVD, ranks, subspace bases) backed by
//! nalgebra. Used only by analysis code and tests at desk scale.

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{DenseMatrix, SparseMatrix};

pub type Complex64 = Complex<f64>;

/// Default relative threshold for numerical rank: singular values
/// `≤ RANK_RTOL · σ_max` count as zero.
pub const RANK_RTOL: f64 = 1e-10;

fn max_iter(n: usize) -> usize {
    200 * n.max(10)
}

/// Eigenvalues of a square real matrix (real Schur form).
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(dim_err("eigenvalues of a non-square matrix"));
    }
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    // A deflation threshold of exactly ε can stall the QR sweeps; a few ulps
    // more costs nothing in accuracy.
    let nm = m.to_nalgebra();
    let schur = [4.0, 64.0]
        .iter()
        .find_map(|k| Schur::try_new(nm.clone(), k * f64::EPSILON, max_iter(m.rows())))
        .ok_or(Error::Eigensolve)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Thin SVD with singular values sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows × k` left singular vectors.
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    /// `cols × k` right singular vectors (as columns).
    pub v: DenseMatrix,
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(m.rows(), 0),
            s: Vec::new(),
            v: DenseMatrix::zeros(m.cols(), 0),
        });
    }
    let d = SVD::try_new(
        m.to_nalgebra(),
        true,
        true,
        f64::EPSILON,
        max_iter(m.rows().max(m.cols())),
    )
    .ok_or(Error::Eigensolve)?;
    let u = d.u.as_ref().ok_or(Error::Eigensolve)?;
    let vt = d.v_t.as_ref().ok_or(Error::Eigensolve)?;
    let mut order: Vec<usize> = (0..d.singular_values.len()).collect();
    order.sort_by(|&a, &b| d.singular_values[b].total_cmp(&d.singular_values[a]));
    let s = order.iter().map(|&k| d.singular_values[k]).collect();
    let uu = DenseMatrix::from_fn(m.rows(), order.len(), |i, j| u[(i, order[j])]);
    let vv = DenseMatrix::from_fn(m.cols(), order.len(), |i, j| vt[(order[j], i)]);
    Ok(Svd { u: uu, s, v: vv })
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let d = SVD::try_new(
        m.to_nalgebra(),
        false,
        false,
        f64::EPSILON,
        max_iter(m.rows().max(m.cols())),
    )
    .ok_or(Error::Eigensolve)?;
    let mut s: Vec<f64> = d.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn count_above(s: &[f64], rtol: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rtol * smax).count()
}

/// Numerical rank with threshold `rtol · σ_max`.
pub fn rank_with(m: &DenseMatrix, rtol: f64) -> Result<usize> {
    Ok(count_above(&singular_values(m)?, rtol))
}

pub fn rank(m: &DenseMatrix) -> Result<usize> {
    rank_with(m, RANK_RTOL)
}

/// Orthonormal basis of `R(M)` as the columns of an `rows × r` matrix.
pub fn range_basis(m: &DenseMatrix, rtol: f64) -> Result<DenseMatrix> {
    let d = svd(m)?;
    let r = count_above(&d.s, rtol);
    Ok(DenseMatrix::from_fn(m.rows(), r, |i, j| d.u.get(i, j)))
}

/// Orthonormal basis of `N(M)` as the columns of a `cols × (cols − r)` matrix.
pub fn null_basis(m: &DenseMatrix, rtol: f64) -> Result<DenseMatrix> {
    let n = m.cols();
    // Pad to square so the full right singular basis is available.
    let sq = if m.rows() < n {
        DenseMatrix::from_fn(n, n, |i, j| if i < m.rows() { m.get(i, j) } else { 0.0 })
    } else {
        m.clone()
    };
    let d = svd(&sq)?;
    let r = count_above(&d.s, rtol);
    Ok(DenseMatrix::from_fn(n, n - r, |i, j| d.v.get(i, r + j)))
}

/// Minimum-norm least-squares solution `M⁺ b`.
pub fn pinv_solve(m: &DenseMatrix, b: &[f64], rtol: f64) -> Result<Vec<f64>> {
    if b.len() != m.rows() {
        return Err(dim_err("pinv_solve: rhs length"));
    }
    let d = svd(m)?;
    let r = count_above(&d.s, rtol);
    let mut x = vec![0.0; m.cols()];
    for k in 0..r {
        let c: f64 = (0..m.rows()).map(|i| d.u.get(i, k) * b[i]).sum::<f64>() / d.s[k];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += c * d.v.get(i, k);
        }
    }
    Ok(x)
}

/// 2-norm `‖M‖ = σ_max`.
pub fn norm2(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Spectral norm of a sparse matrix from the dense symmetric eigenvalues of
/// the smaller Gram matrix (`XᵀX` or `XXᵀ`).
pub fn spectral_norm(x: &SparseMatrix) -> Result<f64> {
    if x.nnz() == 0 {
        return Ok(0.0);
    }
    let xt = x.transpose();
    let gram = if x.rows() <= x.cols() {
        x.matmul(&xt)?
    } else {
        xt.matmul(x)?
    };
    let ev = gram.to_dense().to_nalgebra().symmetric_eigenvalues();
    Ok(ev.iter().copied().fold(0.0, f64::max).max(0.0).sqrt())
}

/// Eigenvalues together with unit-norm eigenvectors (columns of `vectors`).
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    /// 2-norm condition number of the eigenvector matrix.
    pub fn condition(&self) -> f64 {
        let s = self.vectors.clone().singular_values();
        let max = s.iter().copied().fold(0.0, f64::max);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Eigen-decomposition of a diagonalizable real matrix.
///
/// Eigenvalues are grouped into clusters (`|λ − μ| ≤ cluster_tol · max(1, |λ|)`);
/// each cluster of multiplicity `m` must have an `m`-dimensional eigenspace,
/// otherwise the matrix is reported as not diagonalizable.
pub fn eigen_decomposition(m: &DenseMatrix, cluster_tol: f64) -> Result<EigenDecomposition> {
    let n = m.rows();
    let values = eigenvalues(m)?;
    let mc: DMatrix<Complex64> = m.to_nalgebra().map(|v| Complex::new(v, 0.0));
    let scale = m.norm_inf().max(f64::MIN_POSITIVE);

    let mut assigned = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&k| !assigned[k] && (values[k] - values[i]).norm() <= cluster_tol * values[i].norm().max(1.0))
            .collect();
        for &k in &members {
            assigned[k] = true;
        }
        let mult = members.len();
        let centre = members.iter().map(|&k| values[k]).sum::<Complex64>() / mult as f64;
        let shifted = &mc - DMatrix::<Complex64>::identity(n, n) * centre;
        let vecs = if mult == 1 {
            vec![inverse_iteration(&shifted, scale)?]
        } else {
            let d = shifted.svd(false, true);
            let vt = d.v_t.ok_or(Error::Eigensolve)?;
            let mut idx: Vec<usize> = (0..d.singular_values.len()).collect();
            idx.sort_by(|&a, &b| d.singular_values[a].total_cmp(&d.singular_values[b]));
            // Geometric multiplicity check on the m smallest singular values.
            let worst = d.singular_values[idx[mult - 1]];
            if worst > 1e-6 * scale {
                return Err(Error::NotDiagonalizable {
                    condition: f64::INFINITY,
                });
            }
            idx[..mult].iter().map(|&k| vt.row(k).adjoint().into_owned()).collect()
        };
        for (k, v) in members.iter().zip(vecs) {
            order.push(*k);
            let nv = v.norm();
            columns.push(v / Complex::new(nv, 0.0));
        }
    }
    let vectors = DMatrix::from_columns(&columns);
    let values = order.iter().map(|&k| values[k]).collect();
    Ok(EigenDecomposition { values, vectors })
}

fn inverse_iteration(shifted: &DMatrix<Complex64>, scale: f64) -> Result<DVector<Complex64>> {
    let n = shifted.nrows();
    // Perturb the shift slightly so the LU stays invertible for exact eigenvalues.
    let eps = Complex::new(scale * 1e-13, 0.0);
    let lu = (shifted + DMatrix::<Complex64>::identity(n, n) * eps).lu();
    let mut v = DVector::from_fn(n, |i, _| {
        Complex::new(1.0 + (i as f64 * 0.618).sin(), 0.3 * (i as f64).cos())
    });
    for _ in 0..3 {
        let w = lu.solve(&v).ok_or(Error::Eigensolve)?;
        let nw = w.norm();
        if !nw.is_finite() || nw == 0.0 {
            return Err(Error::Eigensolve);
        }
        v = w / Complex::new(nw, 0.0);
    }
    Ok(v)
}
