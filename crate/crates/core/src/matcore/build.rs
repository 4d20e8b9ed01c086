//! Structured constructors: tridiagonal matrices, Kronecker products and sums,
//! block-diagonal (direct) sums and block assembly.

use crate::error::{dim_err, Result};
use crate::matcore::SparseMatrix;

/// `n × n` tridiagonal matrix with constant sub-, main and super-diagonal.
pub fn tridiag(n: usize, sub: f64, diag: f64, sup: f64) -> SparseMatrix {
    let mut trips = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            trips.push((i, i - 1, sub));
        }
        trips.push((i, i, diag));
        if i + 1 < n {
            trips.push((i, i + 1, sup));
        }
    }
    SparseMatrix::from_triplets(n, n, &trips).expect("indices in range")
}

/// Kronecker product: block `(i, j)` of the result is `a_ij · B`.
pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let (p, q) = (b.rows(), b.cols());
    let mut trips = Vec::with_capacity(a.nnz() * b.nnz());
    for (i, j, x) in a.iter() {
        for (k, l, y) in b.iter() {
            trips.push((i * p + k, j * q + l, x * y));
        }
    }
    SparseMatrix::from_triplets(a.rows() * p, a.cols() * q, &trips).expect("indices in range")
}

/// Kronecker sum `A ⊗ I + I ⊗ B` of square matrices.
pub fn kron_sum(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(dim_err("kron_sum needs square operands"));
    }
    let ia = SparseMatrix::identity(a.rows());
    let ib = SparseMatrix::identity(b.rows());
    kron(a, &ib).add(&kron(&ia, b))
}

/// Block-diagonal stacking `diag(A, B)`.
pub fn direct_sum(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let (r, c) = (a.rows(), a.cols());
    let trips: Vec<_> = a.iter().chain(b.iter().map(|(i, j, v)| (i + r, j + c, v))).collect();
    SparseMatrix::from_triplets(r + b.rows(), c + b.cols(), &trips).expect("indices in range")
}

/// Assembles a block matrix from a grid of optional blocks (`None` = zero).
/// Row heights and column widths are taken from the first present block in
/// each block row / column.
pub fn block(grid: &[Vec<Option<&SparseMatrix>>]) -> Result<SparseMatrix> {
    let nbr = grid.len();
    let nbc = grid.first().map_or(0, Vec::len);
    let mut heights = vec![None; nbr];
    let mut widths = vec![None; nbc];
    for (bi, row) in grid.iter().enumerate() {
        if row.len() != nbc {
            return Err(dim_err("ragged block grid"));
        }
        for (bj, blk) in row.iter().enumerate() {
            if let Some(m) = blk {
                for (slot, v) in [(&mut heights[bi], m.rows()), (&mut widths[bj], m.cols())] {
                    match slot {
                        Some(s) if *s != v => return Err(dim_err("inconsistent block sizes")),
                        _ => *slot = Some(v),
                    }
                }
            }
        }
    }
    let heights: Vec<usize> = heights
        .into_iter()
        .map(|h| h.ok_or_else(|| dim_err("empty block row")))
        .collect::<Result<_>>()?;
    let widths: Vec<usize> = widths
        .into_iter()
        .map(|w| w.ok_or_else(|| dim_err("empty block column")))
        .collect::<Result<_>>()?;
    let roff: Vec<usize> = heights
        .iter()
        .scan(0, |s, &h| {
            let o = *s;
            *s += h;
            Some(o)
        })
        .collect();
    let coff: Vec<usize> = widths
        .iter()
        .scan(0, |s, &w| {
            let o = *s;
            *s += w;
            Some(o)
        })
        .collect();
    let mut trips = Vec::new();
    for (bi, row) in grid.iter().enumerate() {
        for (bj, blk) in row.iter().enumerate() {
            if let Some(m) = blk {
                trips.extend(m.iter().map(|(i, j, v)| (i + roff[bi], j + coff[bj], v)));
            }
        }
    }
    SparseMatrix::from_triplets(heights.iter().sum(), widths.iter().sum(), &trips)
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack(parts: &[&SparseMatrix]) -> Result<SparseMatrix> {
    let grid: Vec<Vec<Option<&SparseMatrix>>> = parts.iter().map(|m| vec![Some(*m)]).collect();
    block(&grid)
}
