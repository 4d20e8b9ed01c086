use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::givens::random_givens_orthogonal;
use crate::matcore::DenseMatrix;

/// Matrix of prescribed index with right-hand sides on both sides of the
/// breakdown characterization.
#[derive(Clone, Debug)]
pub struct AppendixFixture {
    pub a: DenseMatrix,
    /// In `R(A^d)`: GMRES from `x0_good` finds a solution.
    pub b_good: Vec<f64>,
    /// In `R(A^{d−1}) + N(A)`.
    pub x0_good: Vec<f64>,
    /// `t + A x0_good` with `0 ≠ t ∈ R(A^{d−1}) ∩ N(A)`: GMRES breaks down at
    /// step one without a solution.
    pub b_bad: Vec<f64>,
    pub index: usize,
}

/// Builds `A = Q (D ⊕ J_d(0)) Qᵀ` with `D` diagonal in `[1, 2]`, `J_d(0)` the
/// nilpotent Jordan block of size `d` and `Q` a random orthogonal product of
/// Givens rotations, so that `ind(A) = d`.
pub fn appendix_fixture(d: usize, n: usize, seed: u64) -> Result<AppendixFixture> {
    if d == 0 || d >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= d < n, got d = {d}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n - d;
    let mut j = DenseMatrix::zeros(n, n);
    for i in 0..k {
        j.set(i, i, rng.gen_range(1.0..2.0));
    }
    // Superdiagonal ones: J e_{k} = 0 and J e_{k+i} = e_{k+i−1}.
    for i in k..n - 1 {
        j.set(i, i + 1, 1.0);
    }
    let q = random_givens_orthogonal(n, 4 * n * n, seed.wrapping_add(1))?;
    let a = q.matmul(&j)?.matmul(&q.transpose())?;

    let lift = |v: &[f64]| q.matvec(v);
    let mut random_in = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect() };

    // R(A^d) = Q span(e_1..e_k); R(A^{d−1}) also reaches e_k (the null vector).
    let mut y = random_in(k);
    y.resize(n, 0.0);
    let b_good = lift(&y)?;
    let mut w = random_in(k);
    w.resize(n, 0.0);
    w[k] = 0.7;
    let x0_good = lift(&w)?;
    let mut t = vec![0.0; n];
    t[k] = 1.0;
    let t = lift(&t)?;
    let ax0 = a.matvec(&x0_good)?;
    let b_bad = t.iter().zip(&ax0).map(|(ti, ai)| ti + ai).collect();
    Ok(AppendixFixture {
        a,
        b_good,
        x0_good,
        b_bad,
        index: d,
    })
}
