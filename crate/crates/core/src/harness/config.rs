use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::SparseMatrix;
use crate::problems::{
    read_problem, stokes_generate_with, structured_generate, Convection, SaddleProblem, DEFAULT_DENSITY,
};
use crate::splittings::SplittingKind;

fn default_density() -> f64 {
    DEFAULT_DENSITY
}

/// Which system to solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProblemSpec {
    Stokes {
        q: usize,
        mu: f64,
        #[serde(default)]
        convection: Convection,
    },
    /// Uses the experiment seed for the rotations.
    Structured {
        q: usize,
        j: u32,
        #[serde(default = "default_density")]
        density: f64,
    },
    /// `A = I`, `b = 1`.
    Identity { n: usize },
    /// A directory written by `write_problem`.
    Directory { path: PathBuf },
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec::Stokes {
            q: 16,
            mu: 1.0,
            convection: Convection::Centered,
        }
    }
}

impl ProblemSpec {
    pub fn build(&self, seed: u64) -> Result<SaddleProblem> {
        match self {
            ProblemSpec::Stokes { q, mu, convection } => stokes_generate_with(*q, *mu, *convection),
            ProblemSpec::Structured { q, j, density } => structured_generate(*q, *j, *density, seed),
            ProblemSpec::Identity { n } => SaddleProblem::custom(SparseMatrix::identity(*n), vec![1.0; *n]),
            ProblemSpec::Directory { path } => read_problem(path),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Unpreconditioned.
    #[default]
    Gmres,
    /// Right preconditioned by `ℓ` stationary steps.
    GmresInner,
    /// Flexible, inner steps until `‖v − A z‖ < |c_{k−1}|`.
    Fgmres,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Gmres => "gmres",
            SolverKind::GmresInner => "gmres-inner",
            SolverKind::Fgmres => "fgmres",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmres" => Ok(SolverKind::Gmres),
            "gmres-inner" => Ok(SolverKind::GmresInner),
            "fgmres" => Ok(SolverKind::Fgmres),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingName {
    Jacobi,
    GaussSeidel,
    Sor,
    Ssor,
    Gss,
    Igss,
    Hss,
    Ihss,
}

impl SplittingName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplittingName::Jacobi => "jacobi",
            SplittingName::GaussSeidel => "gauss-seidel",
            SplittingName::Sor => "sor",
            SplittingName::Ssor => "ssor",
            SplittingName::Gss => "gss",
            SplittingName::Igss => "igss",
            SplittingName::Hss => "hss",
            SplittingName::Ihss => "ihss",
        }
    }
}

impl std::str::FromStr for SplittingName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jacobi" => SplittingName::Jacobi,
            "gauss-seidel" | "gs" => SplittingName::GaussSeidel,
            "sor" => SplittingName::Sor,
            "ssor" => SplittingName::Ssor,
            "gss" => SplittingName::Gss,
            "igss" => SplittingName::Igss,
            "hss" => SplittingName::Hss,
            "ihss" => SplittingName::Ihss,
            _ => return Err(Error::InvalidArgument(format!("unknown splitting {s:?}"))),
        })
    }
}

/// Splitting descriptor with optional parameters; missing ones are filled in
/// by [`SplittingSpec::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingSpec {
    pub name: SplittingName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// GSS only; defaults to `‖B‖² / ‖C‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// SOR/SSOR only; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Inexact variants only; defaults to 0.1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
    /// IHSS only; defaults to `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_maxit: Option<usize>,
}

/// Default relative tolerance of the inexact inner solves.
pub const DEFAULT_INNER_TOL: f64 = 0.1;

impl SplittingSpec {
    pub fn new(name: SplittingName) -> Self {
        Self {
            name,
            alpha: None,
            beta: None,
            omega: None,
            inner_tol: None,
            inner_maxit: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn needs_alpha(&self) -> bool {
        matches!(
            self.name,
            SplittingName::Gss | SplittingName::Igss | SplittingName::Hss | SplittingName::Ihss
        )
    }

    /// The exact splitting whose `ν(H(α))` is minimized for this family.
    pub fn exact_counterpart(&self) -> SplittingName {
        match self.name {
            SplittingName::Igss => SplittingName::Gss,
            SplittingName::Ihss => SplittingName::Hss,
            n => n,
        }
    }

    /// Concrete descriptor; `alpha` must be known by now for shifted kinds.
    pub fn resolve(&self, problem: &SaddleProblem) -> Result<SplittingKind> {
        let alpha = || {
            self.alpha
                .ok_or_else(|| Error::Config(format!("{:?} splitting needs alpha", self.name)))
        };
        let beta = || -> Result<f64> {
            match self.beta {
                Some(b) => Ok(b),
                None => {
                    let (c, b) = problem
                        .blocks
                        .saddle()
                        .ok_or_else(|| Error::Config("GSS needs a Stokes-type problem".into()))?;
                    crate::splittings::gss_default_beta(c, b)
                }
            }
        };
        let inner_tol = self.inner_tol.unwrap_or(DEFAULT_INNER_TOL);
        let omega = self.omega.unwrap_or(1.0);
        Ok(match self.name {
            SplittingName::Jacobi => SplittingKind::Jacobi,
            SplittingName::GaussSeidel => SplittingKind::GaussSeidel,
            SplittingName::Sor => SplittingKind::Sor { omega },
            SplittingName::Ssor => SplittingKind::Ssor { omega },
            SplittingName::Gss => SplittingKind::Gss {
                alpha: alpha()?,
                beta: beta()?,
            },
            SplittingName::Igss => SplittingKind::Igss {
                alpha: alpha()?,
                beta: beta()?,
                inner_tol,
            },
            SplittingName::Hss => SplittingKind::Hss { alpha: alpha()? },
            SplittingName::Ihss => SplittingKind::Ihss {
                alpha: alpha()?,
                inner_tol,
                inner_maxit: self.inner_maxit,
            },
        })
    }
}

/// Where `α` comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum AlphaSource {
    /// The splitting's own `alpha` (or the reference value of a Stokes table).
    #[default]
    Explicit,
    /// Minimize `ν(H(α))` over `10^e`, `e` evenly spaced in `[lo_exp, hi_exp]`.
    GridSearch { lo_exp: f64, hi_exp: f64, points: usize },
}

/// Number of inner steps for `gmres-inner`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InnerSteps {
    Fixed {
        ell: usize,
    },
    /// Stationary-iteration criterion with a cap.
    Select {
        #[serde(default = "default_select_cap")]
        cap: usize,
        #[serde(default = "default_select_tol")]
        tol: f64,
    },
}

fn default_select_cap() -> usize {
    10
}

fn default_select_tol() -> f64 {
    0.1
}

impl Default for InnerSteps {
    fn default() -> Self {
        InnerSteps::Fixed { ell: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodSpec {
    pub solver: SolverKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitting: Option<SplittingSpec>,
    pub inner_steps: InnerSteps,
    pub alpha_source: AlphaSource,
    /// FGMRES inner-iteration cap per outer step; defaults to `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_cap: Option<usize>,
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub method: MethodSpec,
    /// Stop at `‖b − A x_k‖ ≤ tol ‖r₀‖`.
    pub tol: f64,
    /// Outer limit; defaults to `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxit: Option<usize>,
    pub reorthogonalize: bool,
    pub seed: u64,
    /// Per-iteration residual trace (CSV).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    /// Record output (CSV).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::default(),
            method: MethodSpec::default(),
            tol: 1e-6,
            maxit: None,
            reorthogonalize: false,
            seed: 1,
            trace: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
