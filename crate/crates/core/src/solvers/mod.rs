//! Critical-point solvers: truncated-energy minimization for the
//! negative-level minimum, far-point search, the mountain-pass path
//! algorithm, and the sign-split pipeline that runs them for `𝒥₊` and `𝒥₋`.

mod descent;
mod mountain_pass;
mod pipeline;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::functional::{EnergyVariant, Functional, SignRestriction};
use crate::mesh::{DiscreteFunction, Mesh};
use crate::model::{HypothesisReport, ProblemSpec};
use crate::truncation::{HAnalysis, TruncationProfile};

pub use descent::{find_far_point, find_negative_start, minimize_truncated, FarPoint};
pub use mountain_pass::{mountain_pass, MountainPass, Path};
pub use pipeline::{solve_signed, SignedRun};

/// Inner product used to turn differentials into descent directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DescentMetric {
    /// Plain nodal (ℓ²) gradient.
    Euclidean,
    /// H¹₀ Riesz representative `K⁻¹g` of the differential.
    #[default]
    Sobolev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MountainPassOptions {
    /// Interior path points.
    pub points: usize,
    pub max_iter: usize,
    /// Arc-length redistribution period, in iterations.
    pub redistribute_every: usize,
}

impl Default for MountainPassOptions {
    fn default() -> Self {
        Self {
            points: 20,
            max_iter: 50_000,
            redistribute_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Residual tolerance of the descent and mountain-pass iterations.
    pub tol: f64,
    /// Residual bound for accepting a solution of the full functional.
    pub verify_tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub metric: DescentMetric,
    /// Tolerance on opposite-sign nodal values of a signed solution.
    pub sign_tol: f64,
    /// Disable to stop after the two minima.
    pub mountain_pass: bool,
    pub mp: MountainPassOptions,
    /// Record per-iteration trace rows.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            verify_tol: 1e-6,
            max_iter: 200_000,
            armijo: 1e-4,
            metric: DescentMetric::Sobolev,
            sign_tol: 1e-10,
            mountain_pass: true,
            mp: MountainPassOptions::default(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Minimum,
    MountainPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignTag {
    Positive,
    Negative,
    Unsigned,
}

impl From<SignRestriction> for SignTag {
    fn from(s: SignRestriction) -> Self {
        match s {
            SignRestriction::Plus => SignTag::Positive,
            SignRestriction::Minus => SignTag::Negative,
            SignRestriction::Full => SignTag::Unsigned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
    pub seminorm: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: DiscreteFunction,
    pub energy: f64,
    pub residual: f64,
    /// `|∇u|_p`.
    pub seminorm: f64,
    pub sup_norm: f64,
    pub kind: SolutionKind,
    pub sign: SignTag,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Energy and weighted differential norm `‖d𝒥(u)‖_* (1 + ‖u‖_p + |u|_∞)`.
///
/// The dual norm is stood in for by the mass-scaled residual; the value is a
/// diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpsDiagnostic {
    pub energy: f64,
    pub weighted_grad: f64,
}

pub fn cps_metric(
    spec: &ProblemSpec,
    u: &DiscreteFunction,
    variant: &EnergyVariant,
) -> Result<CpsDiagnostic> {
    let f = Functional::new(spec, u.mesh())?;
    Ok(cps_of(&f, u.values(), variant))
}

pub(crate) fn cps_of(f: &Functional, u: &[f64], variant: &EnergyVariant) -> CpsDiagnostic {
    let mut g = vec![0.0; u.len()];
    let energy = f.evaluate(u, variant, Some(&mut g));
    let res = f.residual_of_gradient(&g);
    let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let semi = crate::mesh::gradient_power_integral(f.mesh(), u, f.p()).powf(1.0 / f.p());
    CpsDiagnostic {
        energy,
        weighted_grad: res * (1.0 + semi + sup),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    NegativeStart,
    Minimize,
    FarPoint,
    MountainPass,
    Verify,
}

/// A failed pipeline stage, with the CPS trace near the failure when available.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("{stage:?} ({sign:?}): {reason}")]
pub struct StageFailure {
    pub stage: Stage,
    pub sign: SignRestriction,
    pub reason: String,
    pub diagnostics: Vec<CpsDiagnostic>,
}

impl StageFailure {
    pub(crate) fn new(stage: Stage, sign: SignRestriction, reason: impl Into<String>) -> Self {
        Self {
            stage,
            sign,
            reason: reason.into(),
            diagnostics: Vec::new(),
        }
    }
}

/// Everything the solvers need about one problem instance.
#[derive(Debug, Clone)]
pub struct SolverContext {
    pub spec: ProblemSpec,
    pub functional: Functional,
    pub analysis: HAnalysis,
    pub profile: TruncationProfile,
    pub hypotheses: HypothesisReport,
    pub options: SolverOptions,
}

impl SolverContext {
    /// Fails if the h-curve has no positive window (λ at or above λ₁).
    pub fn new(
        spec: ProblemSpec,
        mesh: &Arc<Mesh>,
        analysis: HAnalysis,
        hypotheses: HypothesisReport,
        options: SolverOptions,
    ) -> Result<Self> {
        let functional = Functional::new(&spec, mesh)?;
        let profile = analysis.profile().ok_or_else(|| {
            Error::InvalidProblem(format!(
                "lambda = {} leaves max h = {:.3e} <= 0; choose lambda below lambda1",
                spec.lambda, analysis.h_max
            ))
        })?;
        Ok(Self {
            spec,
            functional,
            analysis,
            profile,
            hypotheses,
            options,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.functional.mesh()
    }

    pub(crate) fn direction(&self, g: &[f64]) -> Vec<f64> {
        match self.options.metric {
            DescentMetric::Sobolev => self.mesh().sobolev().riesz(g),
            DescentMetric::Euclidean => g.to_vec(),
        }
    }

    /// Template bump `v` for the given sign (negated for `𝒥₋`).
    pub fn template(&self, sign: SignRestriction) -> DiscreteFunction {
        let v = DiscreteFunction::ground_state(self.mesh());
        match sign {
            SignRestriction::Minus => v.scaled(-1.0),
            _ => v,
        }
    }

    pub(crate) fn seminorm(&self, u: &[f64]) -> f64 {
        let p = self.spec.exponents.p;
        crate::mesh::gradient_power_integral(self.mesh(), u, p).powf(1.0 / p)
    }
}
