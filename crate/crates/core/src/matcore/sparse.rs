use crate::error::{dim_err, Error, Result};
use crate::matcore::DenseMatrix;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing inside each row and no explicit
/// zeros are stored: [`SparseMatrix::from_triplets`] sums duplicates and then
/// drops every entry that is exactly `0.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let trips: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &trips).expect("diagonal indices are in range")
    }

    /// Assembles from `(row, col, value)` triplets. Duplicates are summed,
    /// exact zeros pruned.
    pub fn from_triplets(rows: usize, cols: usize, trips: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(trips.len());
        for &(i, j, v) in trips {
            if i >= rows || j >= cols {
                return Err(dim_err(format!("triplet ({i}, {j}) outside {rows}x{cols}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({i}, {j})")));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut k = 0;
        while k < sorted.len() {
            let (i, j, mut v) = sorted[k];
            k += 1;
            while k < sorted.len() && sorted[k].0 == i && sorted[k].1 == j {
                v += sorted[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut indptr = Vec::with_capacity(d.rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..d.rows() {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: d.rows(),
            cols: d.cols(),
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            d.set(i, j, v);
        }
        d
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, accumulated row-sequentially.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.cols || y.len() != self.rows {
            return Err(dim_err(format!(
                "matvec: {}x{} matrix with vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            let mut acc = 0.0;
            for (&j, &a) in c.iter().zip(v) {
                acc += a * x[j];
            }
            *yi = acc;
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let trips: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, &trips).expect("transpose keeps indices in range")
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<SparseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dim_err("lin_comb: shapes differ"));
        }
        let trips: Vec<_> = self
            .iter()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.iter().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        Self::from_triplets(self.rows, self.cols, &trips)
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let trips: Vec<_> = self.iter().map(|(i, j, v)| (i, j, s * v)).collect();
        Self::from_triplets(self.rows, self.cols, &trips).expect("same pattern")
    }

    /// `self + s I`.
    pub fn shifted(&self, s: f64) -> SparseMatrix {
        let n = self.rows.min(self.cols);
        let trips: Vec<_> = self.iter().chain((0..n).map(|i| (i, i, s))).collect();
        Self::from_triplets(self.rows, self.cols, &trips).expect("same shape")
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(dim_err("sparse matmul: inner dimensions differ"));
        }
        let mut trips = Vec::new();
        for i in 0..self.rows {
            let (ci, vi) = self.row(i);
            for (&k, &a) in ci.iter().zip(vi) {
                let (ck, vk) = other.row(k);
                for (&j, &b) in ck.iter().zip(vk) {
                    trips.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.rows, other.cols, &trips)
    }

    pub fn norm_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Replaces row `i` with the given entries (used to plant defects in tests).
    pub fn with_row(&self, i: usize, entries: &[(usize, f64)]) -> Result<SparseMatrix> {
        let trips: Vec<_> = self
            .iter()
            .filter(|&(r, _, _)| r != i)
            .chain(entries.iter().map(|&(j, v)| (i, j, v)))
            .collect();
        Self::from_triplets(self.rows, self.cols, &trips)
    }

    /// Checks the CSR structural invariants.
    pub fn check_structure(&self) -> bool {
        self.indptr.len() == self.rows + 1
            && self.indptr[0] == 0
            && *self.indptr.last().unwrap() == self.values.len()
            && self.indptr.windows(2).all(|w| w[0] <= w[1])
            && (0..self.rows).all(|i| {
                let (c, _) = self.row(i);
                c.windows(2).all(|w| w[0] < w[1]) && c.iter().all(|&j| j < self.cols)
            })
            && self.values.iter().all(|&v| v != 0.0)
    }
}
