//! Small singular systems with semiconvergent splittings, shared by the
//! property suites.
#![allow(dead_code)]

use inner_gmres::analysis::spectral_report;
use inner_gmres::matcore::SparseMatrix;
use inner_gmres::problems::{stokes_generate, structured_generate};
use inner_gmres::splittings::{gss_default_beta, ClassicKind, Splitting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub name: String,
    pub s: Splitting,
}

impl Fixture {
    pub fn a(&self) -> &SparseMatrix {
        self.s.matrix()
    }

    pub fn n(&self) -> usize {
        self.s.dim()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Weighted graph Laplacian of a random connected graph: symmetric, singular,
/// null space spanned by the ones vector.
pub fn laplacian(n: usize, extra_edges: usize, seed: u64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut w = vec![vec![0.0; n]; n];
    let connect = |i: usize, j: usize, x: f64, w: &mut Vec<Vec<f64>>| {
        w[i][j] += x;
        w[j][i] += x;
    };
    for i in 1..n {
        let j = r.gen_range(0..i);
        let x = r.gen_range(0.5..2.0);
        connect(i, j, x, &mut w);
    }
    for _ in 0..extra_edges {
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i != j {
            let x = r.gen_range(0.5..2.0);
            connect(i, j, x, &mut w);
        }
    }
    let mut t = Vec::new();
    for i in 0..n {
        let d: f64 = w[i].iter().sum();
        t.push((i, i, d));
        for j in 0..n {
            if w[i][j] != 0.0 {
                t.push((i, j, -w[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

/// Nonsymmetric singular M-matrix `D − W` with zero column sums.
pub fn singular_m_matrix(n: usize, seed: u64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut t = Vec::new();
    let mut col = vec![0.0; n];
    for i in 0..n {
        // A cycle keeps the graph strongly connected.
        let next = (i + 1) % n;
        let x = r.gen_range(0.5..1.5);
        t.push((next, i, -x));
        col[i] += x;
        for _ in 0..2 {
            let j = r.gen_range(0..n);
            if j != i && j != next {
                let x = r.gen_range(0.1..1.0);
                t.push((j, i, -x));
                col[i] += x;
            }
        }
    }
    for (i, c) in col.iter().enumerate() {
        t.push((i, i, *c));
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

fn stokes_gss(q: usize, alpha: f64) -> Fixture {
    let p = stokes_generate(q, 1.0).unwrap();
    let (c, b) = p.blocks.saddle().unwrap();
    let beta = gss_default_beta(c, b).unwrap();
    Fixture {
        name: format!("stokes q={q} gss alpha={alpha}"),
        s: Splitting::gss(c, b, alpha, beta).unwrap(),
    }
}

fn structured_hss(q: usize, j: u32, alpha: f64, seed: u64) -> Fixture {
    let p = structured_generate(q, j, 0.3, seed).unwrap();
    Fixture {
        name: format!("structured q={q} j={j} hss alpha={alpha}"),
        s: Splitting::hss(&p.a, alpha).unwrap(),
    }
}

fn classic(name: &str, a: SparseMatrix, kind: ClassicKind) -> Fixture {
    Fixture {
        name: format!("{name} {kind:?}"),
        s: Splitting::classic(&a, kind).unwrap(),
    }
}

/// Twenty fixtures, each checked to be semiconvergent; `n ≤ 60`.
pub fn semiconvergent_fixtures() -> Vec<Fixture> {
    let fx = vec![
        stokes_gss(2, 1.0),
        stokes_gss(2, 5.0),
        stokes_gss(4, 2.0),
        stokes_gss(4, 10.0),
        structured_hss(3, 1, 0.3, 11),
        structured_hss(4, 1, 0.5, 12),
        structured_hss(4, 2, 0.1, 13),
        structured_hss(5, 2, 0.2, 14),
        classic("laplacian n=8", laplacian(8, 4, 21), ClassicKind::GaussSeidel),
        classic("laplacian n=12", laplacian(12, 6, 22), ClassicKind::Sor(0.7)),
        classic("laplacian n=16", laplacian(16, 10, 23), ClassicKind::Sor(1.3)),
        classic("laplacian n=20", laplacian(20, 12, 24), ClassicKind::Ssor(1.0)),
        classic("laplacian n=24", laplacian(24, 20, 25), ClassicKind::Ssor(1.5)),
        classic("laplacian n=30", laplacian(30, 25, 26), ClassicKind::GaussSeidel),
        classic("laplacian n=10", laplacian(10, 3, 27), ClassicKind::Sor(1.1)),
        classic("laplacian n=14", laplacian(14, 8, 28), ClassicKind::Ssor(0.8)),
        classic("m-matrix n=10", singular_m_matrix(10, 31), ClassicKind::GaussSeidel),
        classic("m-matrix n=15", singular_m_matrix(15, 32), ClassicKind::Sor(1.2)),
        classic("m-matrix n=20", singular_m_matrix(20, 33), ClassicKind::GaussSeidel),
        classic("m-matrix n=25", singular_m_matrix(25, 34), ClassicKind::Sor(0.8)),
    ];
    for f in &fx {
        let rep = spectral_report(&f.s.iteration_matrix().unwrap(), 1e-8).unwrap();
        assert!(
            rep.semiconvergent,
            "fixture {} is not semiconvergent (rho {}, nu {})",
            f.name, rep.rho, rep.nu
        );
        assert!(f.n() <= 60, "fixture {} too large", f.name);
    }
    fx
}
