use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{direct_sum, kron, kron_sum, tridiag, vstack, SparseMatrix};
use crate::problems::{Blocks, Family, ProblemMeta, SaddleProblem};
use crate::splittings::saddle_matrix;

/// First-order stencil used for the convection term of `T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convection {
    /// `(2h)⁻¹ tridiag(−1, 0, 1)`.
    #[default]
    Centered,
    /// `(2h)⁻¹ tridiag(−1, 1, 0)`.
    Upwind,
}

impl Convection {
    pub fn as_str(self) -> &'static str {
        match self {
            Convection::Centered => "centered",
            Convection::Upwind => "upwind",
        }
    }
}

impl std::str::FromStr for Convection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(Convection::Centered),
            "upwind" => Ok(Convection::Upwind),
            _ => Err(Error::InvalidArgument(format!("unknown convection stencil {s:?}"))),
        }
    }
}

/// 1-D convection–diffusion block `T` on `q` interior points, `h = 1/(q+1)`.
pub fn stokes_t(q: usize, mu: f64, conv: Convection) -> SparseMatrix {
    let h = 1.0 / (q as f64 + 1.0);
    let diffusion = tridiag(q, -1.0, 2.0, -1.0).scaled(mu / (h * h));
    let convection = match conv {
        Convection::Centered => tridiag(q, -1.0, 0.0, 1.0),
        Convection::Upwind => tridiag(q, -1.0, 1.0, 0.0),
    }
    .scaled(1.0 / (2.0 * h));
    diffusion.add(&convection).expect("same shape")
}

/// Blocks `(C, B)` of the Stokes saddle-point system on a `q × q` grid.
/// `B` has `q² + 2` rows: the discrete divergence plus two dependent rows.
pub fn stokes_blocks(q: usize, mu: f64, conv: Convection) -> Result<(SparseMatrix, SparseMatrix)> {
    if q < 2 || !q.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "grid size q must be even and >= 2, got {q}"
        )));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    let h = 1.0 / (q as f64 + 1.0);
    let t = stokes_t(q, mu, conv);
    let f = tridiag(q, -1.0, 1.0, 0.0).scaled(1.0 / h);
    let iq = SparseMatrix::identity(q);
    let k = kron_sum(&t, &t)?;
    let c = direct_sum(&k, &k);

    let b_hat = vstack(&[&kron(&iq, &f), &kron(&f, &iq)])?.transpose();
    let half = q * q / 2;
    let sum_rows = |range: std::ops::Range<usize>| -> Result<SparseMatrix> {
        let trips: Vec<_> = b_hat
            .iter()
            .filter(|(i, _, _)| range.contains(i))
            .map(|(_, j, v)| (0, j, v))
            .collect();
        SparseMatrix::from_triplets(1, b_hat.cols(), &trips)
    };
    let b1 = sum_rows(0..half)?;
    let b2 = sum_rows(half..q * q)?;
    let b = vstack(&[&b_hat, &b1, &b2])?;
    Ok((c, b))
}

/// Stokes problem with `b = A·1`.
pub fn stokes_generate(q: usize, mu: f64) -> Result<SaddleProblem> {
    stokes_generate_with(q, mu, Convection::Centered)
}

pub fn stokes_generate_with(q: usize, mu: f64, conv: Convection) -> Result<SaddleProblem> {
    let (c, bm) = stokes_blocks(q, mu, conv)?;
    let a = saddle_matrix(&c, &bm)?;
    let ones = vec![1.0; a.rows()];
    let b = a.matvec(&ones)?;
    let density = a.density();
    Ok(SaddleProblem {
        a,
        blocks: Blocks::Saddle { c, b: bm },
        b,
        x_truth: Some(ones),
        meta: ProblemMeta {
            family: Family::Stokes,
            q,
            mu: Some(mu),
            convection: Some(conv),
            j: None,
            seed: None,
            density,
            rotations: None,
            condition: None,
        },
    })
}
