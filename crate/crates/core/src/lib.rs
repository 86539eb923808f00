//! Multiple signed solutions of quasilinear Dirichlet problems
//!
//! ```text
//! −div a(x, u, ∇u) + A_t(x, u, ∇u) = λ|u|^{q−2}u + |u|^{s−2}u  in Ω,   u = 0 on ∂Ω,
//! ```
//!
//! with `1 < q < p < s`, discretized by P1 finite elements on the unit
//! interval or square. A negative-level local minimum is obtained by
//! minimizing a truncated energy, a positive-level critical point by a
//! mountain-pass path algorithm, and sign-restricted energies split each into
//! a positive and a negative solution.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod functional;
mod linesearch;
pub mod mesh;
pub mod model;
pub mod profile;
pub mod run;
pub mod solvers;
pub mod truncation;

pub use error::{Error, Result};
pub use functional::{
    energy, gradient, residual_norm, EnergyVariant, Functional, GradientVector, SignRestriction,
};
pub use mesh::{
    build_mesh, estimate_embedding_constant, norm_lp, seminorm_w1p, DiscreteFunction,
    EmbeddingEstimate, EmbeddingOptions, Mesh,
};
pub use model::{
    check_hypotheses, evaluate_lagrangian, EmbeddingMode, Exponents, HypothesisReport, Lagrangian,
    LagrangianFamily, ProblemSpec, SamplingPlan,
};
pub use profile::{read_profile, write_profile};
pub use run::{prepare, run, LambdaSpec, Preparation, RunConfig, RunMode, RunOutcome, RunReport, RunStatus};
pub use solvers::{
    solve_signed, Solution, SolutionKind, SolverContext, SolverOptions, StageFailure,
};
pub use truncation::{
    analyze_h, analyze_h_with_tol, h_eval, lambda1, lambda1_with_tol, tau_eval, tau_prime_eval,
    HAnalysis, HCurveConstants, TruncationProfile,
};
