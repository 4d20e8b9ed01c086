//! Random Givens rotations.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with a `u64`, which is
//! portable across platforms, so generated matrices are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::DenseMatrix;

/// Plane rotation acting on coordinates `i < j`:
/// `[x_i, x_j] ← [c x_i − s x_j, s x_i + c x_j]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

impl Givens {
    /// Right-multiplies `m` by the rotation (mixes columns `i` and `j`).
    pub fn apply_right(&self, m: &mut DenseMatrix) {
        let cols = m.cols();
        let data = m.data_mut();
        for row in data.chunks_mut(cols) {
            let (xi, xj) = (row[self.i], row[self.j]);
            row[self.i] = self.c * xi - self.s * xj;
            row[self.j] = self.s * xi + self.c * xj;
        }
    }

    /// Left-multiplies `m` by the transposed rotation (mixes rows `i` and `j`).
    pub fn apply_left_transpose(&self, m: &mut DenseMatrix) {
        let cols = m.cols();
        let data = m.data_mut();
        for k in 0..cols {
            let (xi, xj) = (data[self.i * cols + k], data[self.j * cols + k]);
            data[self.i * cols + k] = self.c * xi - self.s * xj;
            data[self.j * cols + k] = self.s * xi + self.c * xj;
        }
    }
}

/// Seeded stream of rotations with uniformly random index pairs and angles
/// uniform in `[0, 2π)`.
pub struct GivensSampler {
    n: usize,
    rng: ChaCha8Rng,
}

impl GivensSampler {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("Givens rotations need n >= 2, got {n}")));
        }
        Ok(Self {
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn next_rotation(&mut self) -> Givens {
        let a = self.rng.gen_range(0..self.n);
        let mut b = self.rng.gen_range(0..self.n - 1);
        if b >= a {
            b += 1;
        }
        let theta = self.rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        Givens {
            i: a.min(b),
            j: a.max(b),
            c,
            s,
        }
    }
}

/// Product of `num_rotations` random Givens rotations (an orthogonal matrix).
pub fn random_givens_orthogonal(n: usize, num_rotations: usize, seed: u64) -> Result<DenseMatrix> {
    let mut sampler = GivensSampler::new(n, seed)?;
    let mut q = DenseMatrix::identity(n);
    for _ in 0..num_rotations {
        sampler.next_rotation().apply_right(&mut q);
    }
    Ok(q)
}
