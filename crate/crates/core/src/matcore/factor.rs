//! Dense LU (partial pivoting) and Cholesky factorizations.
//!
//! Factors are computed once and are immutable afterwards, so a
//! [`Factorization`] can be shared read-only between concurrent solves.

use rayon::prelude::*;

use crate::error::{dim_err, Error, Result};
use crate::matcore::DenseMatrix;

/// Below this trailing size the elimination updates run sequentially.
const PAR_THRESHOLD: usize = 192;

/// Relative pivot threshold: a pivot with `|p| ≤ SINGULAR_PIVOT · ‖M‖_∞` is
/// treated as exactly singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Lu,
    Cholesky,
}

#[derive(Clone, Debug)]
pub struct Factorization {
    kind: FactorKind,
    /// LU: unit-lower `L` below the diagonal and `U` on and above it.
    /// Cholesky: lower-triangular `L` with `M = L Lᵀ`.
    factors: DenseMatrix,
    /// Row `i` of the factored matrix is row `perm[i]` of the input (LU only).
    perm: Vec<usize>,
}

impl Factorization {
    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    pub fn factors(&self) -> &DenseMatrix {
        &self.factors
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `M z = v`.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(dim_err(format!("solve: n = {n}, rhs length {}", v.len())));
        }
        let mut z = match self.kind {
            FactorKind::Lu => self.perm.iter().map(|&p| v[p]).collect(),
            FactorKind::Cholesky => v.to_vec(),
        };
        self.solve_in_place(&mut z);
        Ok(z)
    }

    fn solve_in_place(&self, z: &mut [f64]) {
        let n = self.dim();
        let f = &self.factors;
        match self.kind {
            FactorKind::Lu => {
                for i in 0..n {
                    let row = &f.row(i)[..i];
                    let s: f64 = row.iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
                    z[i] -= s;
                }
                for i in (0..n).rev() {
                    let row = f.row(i);
                    let s: f64 = row[i + 1..].iter().zip(&z[i + 1..]).map(|(a, b)| a * b).sum();
                    z[i] = (z[i] - s) / row[i];
                }
            }
            FactorKind::Cholesky => {
                for i in 0..n {
                    let row = f.row(i);
                    let s: f64 = row[..i].iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
                    z[i] = (z[i] - s) / row[i];
                }
                // Lᵀ z = y, column-oriented so rows of L are read contiguously.
                for i in (0..n).rev() {
                    let row = f.row(i);
                    z[i] /= row[i];
                    let zi = z[i];
                    for (zk, l) in z[..i].iter_mut().zip(&row[..i]) {
                        *zk -= l * zi;
                    }
                }
            }
        }
    }
}

/// LU factorization with partial (row) pivoting.
pub fn lu_factor(m: &DenseMatrix) -> Result<Factorization> {
    if !m.is_square() {
        return Err(dim_err("lu_factor needs a square matrix"));
    }
    let n = m.rows();
    let threshold = SINGULAR_PIVOT * m.norm_inf();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let data = a.data_mut();
    for k in 0..n {
        let (p, pmax) =
            (k..n)
                .map(|i| (i, data[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold || pmax == 0.0 {
            return Err(Error::SingularFactorization { column: k, pivot: pmax });
        }
        if p != k {
            for j in 0..n {
                data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let (top, bottom) = data.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..];
        let pivot = pivot_row[k];
        let eliminate = |row: &mut [f64]| {
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                for (r, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *r -= l * u;
                }
            }
        };
        if n - k > PAR_THRESHOLD {
            bottom.par_chunks_mut(n).for_each(eliminate);
        } else {
            bottom.chunks_mut(n).for_each(eliminate);
        }
    }
    Ok(Factorization {
        kind: FactorKind::Lu,
        factors: a,
        perm,
    })
}

/// Cholesky factorization `M = L Lᵀ` of a symmetric positive definite matrix.
/// Only the lower triangle of `m` is read.
pub fn chol_factor(m: &DenseMatrix) -> Result<Factorization> {
    if !m.is_square() {
        return Err(dim_err("chol_factor needs a square matrix"));
    }
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    let data = l.data_mut();
    for j in 0..n {
        let rj = &data[j * n..j * n + j];
        let d = m.get(j, j) - rj.iter().map(|v| v * v).sum::<f64>();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotSpd { column: j });
        }
        let ljj = d.sqrt();
        data[j * n + j] = ljj;
        let (top, bottom) = data.split_at_mut((j + 1) * n);
        let rj = &top[j * n..j * n + j];
        let fill = |(off, row): (usize, &mut [f64])| {
            let i = j + 1 + off;
            let s: f64 = row[..j].iter().zip(rj).map(|(a, b)| a * b).sum();
            row[j] = (m.get(i, j) - s) / ljj;
        };
        if n - j > PAR_THRESHOLD {
            bottom.par_chunks_mut(n).enumerate().for_each(fill);
        } else {
            bottom.chunks_mut(n).enumerate().for_each(fill);
        }
    }
    Ok(Factorization {
        kind: FactorKind::Cholesky,
        factors: l,
        perm: (0..n).collect(),
    })
}

/// Solves `M z = v` with a precomputed factorization.
pub fn fact_solve(f: &Factorization, v: &[f64]) -> Result<Vec<f64>> {
    f.solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::vector::rel_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        g.transpose().matmul(&g).unwrap().shifted(n as f64 * 0.1)
    }

    /// Gauss–Jordan inverse: an oracle independent of the LU code path.
    fn gauss_jordan_inverse(m: &DenseMatrix) -> DenseMatrix {
        let n = m.rows();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = m.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
                .unwrap();
            a.swap(c, p);
            let piv = a[c][c];
            for v in a[c].iter_mut() {
                *v /= piv;
            }
            for r in 0..n {
                if r != c {
                    let f = a[r][c];
                    let pr = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(&pr) {
                        *x -= f * y;
                    }
                }
            }
        }
        DenseMatrix::from_fn(n, n, |i, j| a[i][n + j])
    }

    #[test]
    fn identity_solves_to_rhs() {
        let f = lu_factor(&DenseMatrix::identity(4)).unwrap();
        let v = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(fact_solve(&f, &v).unwrap(), v);
    }

    #[test]
    fn cholesky_diag() {
        let f = chol_factor(&DenseMatrix::from_diag(&[4.0, 9.0])).unwrap();
        let z = f.solve(&[2.0, 3.0]).unwrap();
        assert!((z[0] - 0.5).abs() < 1e-15);
        assert!((z[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_matches_inverse_oracle() {
        let m = random_spd(8, 11);
        let inv = gauss_jordan_inverse(&m);
        let v: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let oracle = inv.matvec(&v).unwrap();
        for f in [lu_factor(&m).unwrap(), chol_factor(&m).unwrap()] {
            let z = f.solve(&v).unwrap();
            assert!(rel_diff(&z, &oracle) <= 1e-10, "{:?}", f.kind());
        }
    }

    #[test]
    fn lu_pivots_on_zero_leading_entry() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let z = lu_factor(&m).unwrap().solve(&[1.0, 5.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            lu_factor(&m),
            Err(Error::SingularFactorization { column: 1, .. })
        ));
    }

    #[test]
    fn non_spd_rejected() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(chol_factor(&m), Err(Error::NotSpd { column: 1 })));
    }

    #[test]
    fn large_lu_left_inverse() {
        // Exercises the parallel elimination path.
        let n = 400;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DenseMatrix::from_fn(n, n, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 });
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let b = m.matvec(&x).unwrap();
        let z = lu_factor(&m).unwrap().solve(&b).unwrap();
        assert!(rel_diff(&z, &x) < 1e-10);
    }
}
