//! Test-problem generators: the Stokes saddle-point system and the
//! orthogonally structured generalized saddle-point system.

mod stokes;
mod structured;

pub use stokes::{stokes_blocks, stokes_generate, stokes_generate_with, stokes_t, Convection};
pub use structured::{structured_canonical, structured_generate, structured_unrotated, DEFAULT_DENSITY};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{linalg, mtx, DenseMatrix, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Stokes,
    Structured,
    /// Any square system without block structure.
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Stokes => "stokes",
            Family::Structured => "structured",
            Family::Custom => "custom",
        }
    }
}

/// Block data of a saddle-point problem.
#[derive(Clone, Debug)]
pub enum Blocks {
    /// `A = [[C, Bᵀ], [−B, O]]`, `C` `p × p`, `B` `q × p`.
    Saddle { c: SparseMatrix, b: SparseMatrix },
    /// `A = [[C, B], [−Bᵀ, G]]`, `C` `p × p`, `B` `p × q`, `G` `q × q`.
    Generalized {
        c: SparseMatrix,
        b: SparseMatrix,
        g: SparseMatrix,
    },
    /// No block structure known.
    Unstructured,
}

impl Blocks {
    pub fn saddle(&self) -> Option<(&SparseMatrix, &SparseMatrix)> {
        match self {
            Blocks::Saddle { c, b } => Some((c, b)),
            Blocks::Generalized { .. } | Blocks::Unstructured => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub family: Family,
    pub q: usize,
    pub mu: Option<f64>,
    pub convection: Option<Convection>,
    pub j: Option<u32>,
    pub seed: Option<u64>,
    /// Achieved fraction of nonzero entries of `A`.
    pub density: f64,
    /// Givens rotations applied on the `U` and `V` sides.
    pub rotations: Option<(usize, usize)>,
    /// `‖A‖‖A†‖` measured at construction.
    pub condition: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SaddleProblem {
    pub a: SparseMatrix,
    pub blocks: Blocks,
    pub b: Vec<f64>,
    pub x_truth: Option<Vec<f64>>,
    pub meta: ProblemMeta,
}

impl SaddleProblem {
    /// Wraps a plain square system.
    pub fn custom(a: SparseMatrix, b: Vec<f64>) -> Result<Self> {
        if !a.is_square() || b.len() != a.rows() {
            return Err(crate::error::dim_err("custom problem needs square A and matching b"));
        }
        let density = a.density();
        Ok(Self {
            a,
            blocks: Blocks::Unstructured,
            b,
            x_truth: None,
            meta: ProblemMeta {
                family: Family::Custom,
                q: 0,
                mu: None,
                convection: None,
                j: None,
                seed: None,
                density,
                rotations: None,
                condition: None,
            },
        })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Short human-readable descriptor, e.g. `stokes q=16 mu=1`.
    pub fn describe(&self) -> String {
        let m = &self.meta;
        match m.family {
            Family::Stokes => format!("stokes q={} mu={}", m.q, m.mu.unwrap_or(f64::NAN)),
            Family::Structured => format!("structured q={} j={}", m.q, m.j.unwrap_or(0)),
            Family::Custom => format!("custom n={}", self.n()),
        }
    }
}

/// One invariant check of [`verify_problem`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// `None` when skipped (dense budget exceeded).
    pub passed: Option<bool>,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ProblemReport {
    pub checks: Vec<Check>,
}

impl ProblemReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Default limit on `n` for dense checks.
pub const DENSE_BUDGET: usize = 1500;

fn sym_eig_range(m: &SparseMatrix) -> (f64, f64, f64) {
    let d = m.to_dense();
    let asym = d.sub(&d.transpose()).expect("square").norm_max();
    let sym = d.lin_comb(0.5, &d.transpose(), 0.5).expect("square");
    let ev = sym.to_nalgebra().symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi, asym)
}

/// Runs the family invariants as checks; failures become report entries.
pub fn verify_problem(p: &SaddleProblem, budget: usize) -> Result<ProblemReport> {
    let mut rep = ProblemReport::default();
    let n = p.n();
    let dense_ok = n <= budget;
    let skipped = |name, detail: String| Check {
        name,
        passed: None,
        value: f64::NAN,
        detail,
    };

    match &p.blocks {
        Blocks::Saddle { c, .. } => {
            let (lo, _, _) = sym_eig_range(c);
            rep.checks.push(Check {
                name: "c-symmetric-part-positive-definite",
                passed: Some(lo > 0.0),
                value: lo,
                detail: format!("min eigenvalue of (C+Cᵀ)/2 = {lo:.6e}"),
            });
        }
        Blocks::Generalized { c, g, .. } => {
            for (name, m) in [("c-symmetric-psd", c), ("g-symmetric-psd", g)] {
                let (lo, hi, asym) = sym_eig_range(m);
                let scale = hi.abs().max(1.0);
                rep.checks.push(Check {
                    name,
                    passed: Some(asym <= 1e-12 * scale && lo >= -1e-10 * scale),
                    value: lo,
                    detail: format!("min eigenvalue {lo:.3e}, asymmetry {asym:.3e}"),
                });
            }
        }
        Blocks::Unstructured => {}
    }

    if !dense_ok {
        rep.checks
            .push(skipped("b-in-range", format!("n = {n} exceeds dense budget {budget}")));
        return Ok(rep);
    }
    let ad = p.a.to_dense();
    let svd_s = linalg::singular_values(&ad)?;
    let smax = svd_s[0];
    let rank = svd_s.iter().filter(|&&s| s > linalg::RANK_RTOL * smax).count();

    let y = linalg::pinv_solve(&ad, &p.b, linalg::RANK_RTOL)?;
    let ay = ad.matvec(&y)?;
    let res = crate::matcore::vector::rel_diff(&ay, &p.b);
    rep.checks.push(Check {
        name: "b-in-range",
        passed: Some(res <= 1e-8),
        value: res,
        detail: format!("least-squares relative residual {res:.3e}"),
    });

    match p.meta.family {
        Family::Stokes => rep.checks.push(Check {
            name: "rank-deficiency",
            passed: Some(n - rank == 2),
            value: (n - rank) as f64,
            detail: format!("rank {rank} of n = {n}"),
        }),
        Family::Structured => {
            let smin = svd_s[rank - 1];
            let cond = smax / smin;
            let j = p.meta.j.unwrap_or(0);
            let expected = 2f64.sqrt() * 10f64.powi(j as i32);
            let rel = ((cond - expected) / expected).abs();
            rep.checks.push(Check {
                name: "condition-identity",
                passed: Some(rel <= 1e-6),
                value: cond,
                detail: format!("‖A‖‖A†‖ = {cond:.8e}, expected √2·10^{j} (relative error {rel:.2e})"),
            });
        }
        Family::Custom => {}
    }
    Ok(rep)
}

fn meta_to_text(m: &ProblemMeta, n: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "family={}", m.family.as_str());
    let _ = writeln!(s, "n={n}");
    let _ = writeln!(s, "q={}", m.q);
    if let Some(mu) = m.mu {
        let _ = writeln!(s, "mu={mu:e}");
    }
    if let Some(c) = m.convection {
        let _ = writeln!(s, "convection={}", c.as_str());
    }
    if let Some(j) = m.j {
        let _ = writeln!(s, "j={j}");
    }
    if let Some(seed) = m.seed {
        let _ = writeln!(s, "seed={seed}");
    }
    let _ = writeln!(s, "density={:e}", m.density);
    if let Some((u, v)) = m.rotations {
        let _ = writeln!(s, "rotations_u={u}");
        let _ = writeln!(s, "rotations_v={v}");
    }
    if let Some(c) = m.condition {
        let _ = writeln!(s, "condition={c:e}");
    }
    s
}

fn parse_kv(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn field<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    kv.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value for {key}: {v:?}")))
        })
        .transpose()
}

fn meta_from_text(text: &str) -> Result<ProblemMeta> {
    let kv = parse_kv(text);
    let family = match kv.get("family").map(String::as_str) {
        Some("stokes") => Family::Stokes,
        Some("structured") => Family::Structured,
        Some("custom") => Family::Custom,
        other => return Err(Error::Config(format!("unknown family {other:?}"))),
    };
    let rotations = match (field(&kv, "rotations_u")?, field(&kv, "rotations_v")?) {
        (Some(u), Some(v)) => Some((u, v)),
        _ => None,
    };
    Ok(ProblemMeta {
        family,
        q: field(&kv, "q")?.ok_or_else(|| Error::Config("missing q".into()))?,
        mu: field(&kv, "mu")?,
        convection: field(&kv, "convection")?,
        j: field(&kv, "j")?,
        seed: field(&kv, "seed")?,
        density: field(&kv, "density")?.unwrap_or(0.0),
        rotations,
        condition: field(&kv, "condition")?,
    })
}

/// Writes `A.mtx`, `b.mtx`, the blocks, `x_truth.mtx` and `meta.txt`.
pub fn write_problem(dir: impl AsRef<Path>, p: &SaddleProblem) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    mtx::write_sparse(dir.join("A.mtx"), &p.a)?;
    mtx::write_vector(dir.join("b.mtx"), &p.b)?;
    if let Some(x) = &p.x_truth {
        mtx::write_vector(dir.join("x_truth.mtx"), x)?;
    }
    match &p.blocks {
        Blocks::Saddle { c, b } => {
            mtx::write_sparse(dir.join("C.mtx"), c)?;
            mtx::write_sparse(dir.join("B.mtx"), b)?;
        }
        Blocks::Generalized { c, b, g } => {
            mtx::write_sparse(dir.join("C.mtx"), c)?;
            mtx::write_sparse(dir.join("B.mtx"), b)?;
            mtx::write_sparse(dir.join("G.mtx"), g)?;
        }
        Blocks::Unstructured => {}
    }
    fs::write(dir.join("meta.txt"), meta_to_text(&p.meta, p.n()))?;
    Ok(())
}

pub fn read_problem(dir: impl AsRef<Path>) -> Result<SaddleProblem> {
    let dir = dir.as_ref();
    let meta = meta_from_text(&fs::read_to_string(dir.join("meta.txt"))?)?;
    let a = mtx::read_sparse(dir.join("A.mtx"))?;
    let b = mtx::read_vector(dir.join("b.mtx"))?;
    let xt = dir.join("x_truth.mtx");
    let x_truth = if xt.exists() { Some(mtx::read_vector(xt)?) } else { None };
    let blocks = match meta.family {
        Family::Stokes => Blocks::Saddle {
            c: mtx::read_sparse(dir.join("C.mtx"))?,
            b: mtx::read_sparse(dir.join("B.mtx"))?,
        },
        Family::Structured => Blocks::Generalized {
            c: mtx::read_sparse(dir.join("C.mtx"))?,
            b: mtx::read_sparse(dir.join("B.mtx"))?,
            g: mtx::read_sparse(dir.join("G.mtx"))?,
        },
        Family::Custom => Blocks::Unstructured,
    };
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "b has length {} for n = {}",
            b.len(),
            a.rows()
        )));
    }
    Ok(SaddleProblem {
        a,
        blocks,
        b,
        x_truth,
        meta,
    })
}

/// Nonzero eigenvalues of the symmetric part of `A`, sorted (used for
/// similarity-invariance checks across seeds).
pub fn symmetric_part_spectrum(a: &SparseMatrix, zero_tol: f64) -> Vec<f64> {
    let d: DenseMatrix = a.to_dense();
    let sym = d.lin_comb(0.5, &d.transpose(), 0.5).expect("square");
    let mut ev: Vec<f64> = sym
        .to_nalgebra()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .filter(|v| v.abs() > zero_tol)
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}
