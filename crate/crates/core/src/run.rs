//! Batch runs: configuration, orchestration of the whole pipeline and the
//! machine-readable report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, estimate_embedding_constant, EmbeddingOptions};
use crate::model::{
    check_hypotheses, EmbeddingMode, Exponents, HypothesisReport, LagrangianFamily, ProblemSpec,
    SamplingPlan,
};
use crate::solvers::{
    solve_signed, Solution, SolutionKind, SolverContext, SolverOptions, SignTag, StageFailure,
};
use crate::truncation::{
    analyze_h_with_tol, lambda1_with_tol, HAnalysis, HCurveConstants, DEFAULT_BISECTION_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum LambdaSpec {
    Absolute(f64),
    /// Fraction of the computed threshold λ₁.
    FractionOfLambda1(f64),
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::FractionOfLambda1(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            id: "p_laplacian".into(),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    #[serde(default)]
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub embedding: EmbeddingMode,
    #[serde(default)]
    pub embedding_options: EmbeddingOptions,
    #[serde(default)]
    pub sampling: SamplingPlan,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Relative tolerance of the λ₁ and h-root bisections.
    #[serde(default = "default_bisection_tol")]
    pub bisection_tol: f64,
    /// Overrides the sampling and embedding seeds when set.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_bisection_tol() -> f64 {
    DEFAULT_BISECTION_TOL
}

impl RunConfig {
    /// The benchmark instance: 1D, n = 128, `A = |ξ|²/2`, q = 1.5, s = 4, λ = λ₁/2.
    pub fn benchmark() -> Self {
        Self {
            dim: 1,
            n: 128,
            p: 2.0,
            q: 1.5,
            s: 4.0,
            lambda: LambdaSpec::default(),
            family: FamilyConfig::default(),
            embedding: EmbeddingMode::DiscreteEstimated,
            embedding_options: EmbeddingOptions::default(),
            sampling: SamplingPlan::default(),
            solver: SolverOptions::default(),
            bisection_tol: DEFAULT_BISECTION_TOL,
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidProblem(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn family(&self) -> Result<LagrangianFamily> {
        LagrangianFamily::from_id(&self.family.id, self.p, &self.family.params)
    }

    /// Problem spec with a placeholder λ; checks every invariant that does not need λ₁.
    pub fn validate(&self) -> Result<()> {
        let lambda_ok = match self.lambda {
            LambdaSpec::Absolute(v) => v.is_finite() && v > 0.0,
            LambdaSpec::FractionOfLambda1(f) => f.is_finite() && f > 0.0,
        };
        if !lambda_ok {
            return Err(Error::InvalidProblem("lambda must be positive".into()));
        }
        if !(self.bisection_tol > 0.0 && self.bisection_tol < 1.0) {
            return Err(Error::InvalidProblem("bisection_tol must lie in (0, 1)".into()));
        }
        let o = &self.solver;
        if !(o.tol > 0.0 && o.verify_tol > 0.0 && o.armijo > 0.0 && o.armijo < 0.5 && o.sign_tol >= 0.0) {
            return Err(Error::InvalidProblem(
                "solver tolerances must be positive and armijo must lie in (0, 1/2)".into(),
            ));
        }
        if self.solver.mp.points == 0 {
            return Err(Error::InvalidProblem("mountain-pass path needs at least one interior point".into()));
        }
        self.spec_with_lambda(1.0)?.validate()
    }

    fn spec_with_lambda(&self, lambda: f64) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            dim: self.dim,
            n: self.n,
            exponents: Exponents::new(self.p, self.q, self.s),
            lambda,
            family: self.family()?,
            embedding: self.embedding,
        })
    }

    /// Sampling plan with the run dimension and seed applied.
    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            dim: self.dim,
            seed: self.seed.unwrap_or(self.sampling.seed),
            ..self.sampling
        }
    }

    pub fn embedding_opts(&self) -> EmbeddingOptions {
        EmbeddingOptions {
            seed: self.seed.unwrap_or(self.embedding_options.seed),
            ..self.embedding_options
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub mode: EmbeddingMode,
    pub c_q: f64,
    pub c_s: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything computed before the signed solve.
#[derive(Debug, Clone)]
pub struct Preparation {
    pub spec: ProblemSpec,
    pub hypotheses: HypothesisReport,
    pub embedding: EmbeddingReport,
    pub constants: HCurveConstants,
    pub lambda1: f64,
    pub analysis: HAnalysis,
    pub timings: Vec<StageTiming>,
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(StageTiming {
        stage: stage.into(),
        seconds: start.elapsed().as_secs_f64(),
    });
    out
}

/// Certifies the family, estimates `c_q`, `c_s`, and resolves λ₁, λ and the h-window.
pub fn prepare(config: &RunConfig) -> Result<Preparation> {
    config.validate()?;
    let mut timings = Vec::new();
    let family = config.family()?;
    let hypotheses = timed(&mut timings, "check_hypotheses", || {
        check_hypotheses(&family, config.p, config.s, &config.sampling_plan())
    });
    let embedding = match config.embedding {
        EmbeddingMode::UserSupplied { c_q, c_s } => EmbeddingReport {
            mode: config.embedding,
            c_q,
            c_s,
            converged: true,
        },
        EmbeddingMode::DiscreteEstimated => timed(&mut timings, "embedding_constants", || {
            let mesh = build_mesh(config.dim, config.n)?;
            let opts = config.embedding_opts();
            let cq = estimate_embedding_constant(&mesh, config.p, config.q, &opts)?;
            let cs = estimate_embedding_constant(&mesh, config.p, config.s, &opts)?;
            Ok::<_, Error>(EmbeddingReport {
                mode: config.embedding,
                c_q: cq.value,
                c_s: cs.value,
                converged: cq.converged && cs.converged,
            })
        })?,
    };
    let alpha1 = if hypotheses.alpha1 > 0.0 { hypotheses.alpha1 } else { f64::NAN };
    let base = HCurveConstants {
        alpha1,
        c_q: embedding.c_q,
        c_s: embedding.c_s,
        lambda: 1.0,
        p: config.p,
        q: config.q,
        s: config.s,
    };
    let l1 = timed(&mut timings, "lambda1", || lambda1_with_tol(&base, config.bisection_tol))?;
    let lambda = match config.lambda {
        LambdaSpec::Absolute(v) => v,
        LambdaSpec::FractionOfLambda1(f) => f * l1,
    };
    let constants = base.with_lambda(lambda);
    let analysis = timed(&mut timings, "analyze_h", || analyze_h_with_tol(&constants, config.bisection_tol))?;
    Ok(Preparation {
        spec: config.spec_with_lambda(lambda)?,
        hypotheses,
        embedding,
        constants,
        lambda1: l1,
        analysis,
        timings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Partial,
    NoSolutions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub kind: SolutionKind,
    pub sign: SignTag,
    pub energy: f64,
    pub residual: f64,
    pub seminorm: f64,
    pub sup_norm: f64,
    pub iterations: usize,
    /// Profile CSV written for this solution.
    pub profile: Option<String>,
}

impl From<&Solution> for SolutionSummary {
    fn from(s: &Solution) -> Self {
        Self {
            kind: s.kind,
            sign: s.sign,
            energy: s.energy,
            residual: s.residual,
            seminorm: s.seminorm,
            sup_norm: s.sup_norm,
            iterations: s.iterations,
            profile: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: ProblemSpec,
    pub lambda1: f64,
    pub embedding: EmbeddingReport,
    pub h_constants: HCurveConstants,
    pub h_analysis: HAnalysis,
    pub hypotheses: HypothesisReport,
    pub expected_solutions: usize,
    pub solutions: Vec<SolutionSummary>,
    pub failures: Vec<StageFailure>,
    pub status: RunStatus,
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    /// The report without wall-clock fields, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: Vec::new(),
            ..self.clone()
        }
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub solutions: Vec<Solution>,
}

/// Which solutions a run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Full,
    MinimaOnly,
    MountainPassOnly,
}

/// Full pipeline: [`prepare`], then the signed solve.
pub fn run(config: &RunConfig, mode: RunMode) -> Result<RunOutcome> {
    let mut prep = prepare(config)?;
    let mesh = build_mesh(config.dim, config.n)?;
    let mut options = config.solver;
    if mode == RunMode::MinimaOnly {
        options.mountain_pass = false;
    }
    let ctx = SolverContext::new(
        prep.spec.clone(),
        &mesh,
        prep.analysis,
        prep.hypotheses.clone(),
        options,
    )?;
    let signed = timed(&mut prep.timings, "solve_signed", || solve_signed(&ctx));
    let mut solutions = signed.solutions;
    let mut expected = signed.expected;
    if mode == RunMode::MountainPassOnly {
        solutions.retain(|s| s.kind == SolutionKind::MountainPass);
        expected = expected.saturating_sub(2);
    }
    let status = if solutions.is_empty() {
        RunStatus::NoSolutions
    } else if solutions.len() < expected || !signed.failures.is_empty() {
        RunStatus::Partial
    } else {
        RunStatus::Complete
    };
    let report = RunReport {
        spec: prep.spec,
        lambda1: prep.lambda1,
        embedding: prep.embedding,
        h_constants: prep.constants,
        h_analysis: prep.analysis,
        hypotheses: prep.hypotheses,
        expected_solutions: expected,
        solutions: solutions.iter().map(SolutionSummary::from).collect(),
        failures: signed.failures,
        status,
        timings: prep.timings,
    };
    Ok(RunOutcome { report, solutions })
}
