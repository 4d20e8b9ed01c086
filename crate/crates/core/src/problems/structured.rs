use crate::error::{Error, Result};
use crate::matcore::givens::{Givens, GivensSampler};
use crate::matcore::{linalg, DenseMatrix, SparseMatrix};
use crate::problems::{Blocks, Family, ProblemMeta, SaddleProblem};

/// Default fraction of nonzero entries aimed for in `A`.
pub const DEFAULT_DENSITY: f64 = 0.001;

/// Geometric sequence of `len` values from `1` down to `kappa` inclusive.
fn geometric(len: usize, kappa: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len).map(|i| kappa.powf(i as f64 / (len - 1) as f64)).collect()
}

/// Canonical (unrotated) generalized saddle-point matrix
/// `[[C, B], [−Bᵀ, G]]` with `p = q²`:
/// `C = diag(φ) ⊕ O_{q+1}`, `G = diag(ψ) ⊕ O_2`, `Bᵀ = [G, O]`, where `φ`
/// (`p − q − 1` values) and `ψ` (`q − 2` values) decay geometrically from 1
/// to `κ = 10⁻ʲ`.
pub fn structured_canonical(q: usize, j: u32) -> Result<DenseMatrix> {
    if q < 3 {
        return Err(Error::InvalidArgument(format!("q must be at least 3, got {q}")));
    }
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let kappa = 10f64.powi(-(j as i32));
    let p = q * q;
    let n = p + q;
    let phi = geometric(p - q - 1, kappa);
    let psi = geometric(q - 2, kappa);
    let mut a = DenseMatrix::zeros(n, n);
    for (i, &v) in phi.iter().enumerate() {
        a.set(i, i, v);
    }
    for (i, &v) in psi.iter().enumerate() {
        a.set(p + i, p + i, v);
        // B = [G; O] in the (1,2) block, −Bᵀ in the (2,1) block.
        a.set(i, p + i, v);
        a.set(p + i, i, -v);
    }
    Ok(a)
}

/// Orthogonal similarity `A ← Rᵀ A R` with a plane rotation `R`.
fn rotate_both_sides(a: &mut DenseMatrix, g: &Givens) {
    g.apply_left_transpose(a);
    g.apply_right(a);
}

fn density(a: &DenseMatrix) -> f64 {
    let nnz = a.data().iter().filter(|&&v| v != 0.0).count();
    nnz as f64 / (a.rows() * a.cols()) as f64
}

/// Structured generalized saddle-point problem
/// `A = diag(U, V) · canonical · diag(U, V)ᵀ` with `U`, `V` products of random
/// Givens rotations. Rotations are applied in batches (`max(1, p/64)` on the
/// `U` side and one on the `V` side) until the density of `A` reaches
/// `density_target`; at least one batch is always applied.
pub fn structured_generate(q: usize, j: u32, density_target: f64, seed: u64) -> Result<SaddleProblem> {
    let canon = structured_canonical(q, j)?;
    let p = q * q;
    let mut a = canon;
    let mut u_rot = GivensSampler::new(p, seed)?;
    let mut v_rot = GivensSampler::new(q, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let batch = (p / 64).max(1);
    let (mut nu, mut nv) = (0, 0);
    // Bound the loop: a full mixing never needs more than n² rotations.
    let limit = (p + q) * (p + q);
    loop {
        for _ in 0..batch {
            rotate_both_sides(&mut a, &u_rot.next_rotation());
        }
        let mut g = v_rot.next_rotation();
        g.i += p;
        g.j += p;
        rotate_both_sides(&mut a, &g);
        nu += batch;
        nv += 1;
        if density(&a) >= density_target || nu >= limit {
            break;
        }
    }
    structured_from_dense(a, q, j, Some(seed), Some((nu, nv)))
}

/// Structured problem without rotations (`U = V = I`).
pub fn structured_unrotated(q: usize, j: u32) -> Result<SaddleProblem> {
    structured_from_dense(structured_canonical(q, j)?, q, j, None, Some((0, 0)))
}

fn structured_from_dense(
    a: DenseMatrix,
    q: usize,
    j: u32,
    seed: Option<u64>,
    rotations: Option<(usize, usize)>,
) -> Result<SaddleProblem> {
    let p = q * q;
    let n = p + q;
    let sparse = SparseMatrix::from_dense(&a);
    let sub = |r0: usize, c0: usize, rows: usize, cols: usize| {
        SparseMatrix::from_dense(&DenseMatrix::from_fn(rows, cols, |i, k| a.get(r0 + i, c0 + k)))
    };
    let c = sub(0, 0, p, p);
    let bm = sub(0, p, p, q);
    let g = sub(p, p, q, q);

    // Guard against construction bugs: ‖A‖‖A†‖ must equal √2·10ʲ.
    let s = linalg::singular_values(&a)?;
    let smax = s[0];
    let smin = s
        .iter()
        .rev()
        .copied()
        .find(|&v| v > linalg::RANK_RTOL * smax)
        .unwrap_or(smax);
    let cond = smax / smin;
    let expected = 2f64.sqrt() * 10f64.powi(j as i32);
    if ((cond - expected) / expected).abs() > 1e-6 {
        return Err(Error::Construction(format!(
            "‖A‖‖A†‖ = {cond:.10e}, expected {expected:.10e}"
        )));
    }

    let xt: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let b = sparse.matvec(&xt)?;
    let density = sparse.density();
    Ok(SaddleProblem {
        a: sparse,
        blocks: Blocks::Generalized { c, b: bm, g },
        b,
        x_truth: Some(xt),
        meta: ProblemMeta {
            family: Family::Structured,
            q,
            mu: None,
            convection: None,
            j: Some(j),
            seed,
            density,
            rotations,
            condition: Some(cond),
        },
    })
}
