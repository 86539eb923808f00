#![allow(dead_code)]

use std::sync::Arc;

use mpsolve_core::{build_mesh, prepare, Mesh, Preparation, RunConfig, SolverContext};

/// Benchmark instance on the given mesh, with λ = λ₁/2 from that mesh's constants.
pub fn benchmark_context(dim: usize, n: usize) -> (Preparation, SolverContext, Arc<Mesh>) {
    let cfg = RunConfig {
        dim,
        n,
        ..RunConfig::benchmark()
    };
    let prep = prepare(&cfg).expect("benchmark config is valid");
    let mesh = build_mesh(dim, n).unwrap();
    let ctx = SolverContext::new(
        prep.spec.clone(),
        &mesh,
        prep.analysis,
        prep.hypotheses.clone(),
        cfg.solver,
    )
    .expect("benchmark lambda lies below lambda1");
    (prep, ctx, mesh)
}

/// Fourth-order central differences of `f` at `u`.
///
/// The stencil is narrow (at most 1e-5, and below `|u_i|/50`) so that it
/// rarely straddles the kinks of `u ↦ u₊^q` at the origin or of `ξ ↦ |ξ|ξ`
/// at a vanishing element gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, u: &[f64]) -> Vec<f64> {
    let mut w = u.to_vec();
    (0..u.len())
        .map(|i| {
            let h = fd_step(u[i]);
            let mut at = |d: f64| {
                w[i] = u[i] + d;
                let v = f(&w);
                w[i] = u[i];
                v
            };
            (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
        })
        .collect()
}

pub fn fd_step(v: f64) -> f64 {
    1e-5f64.min(0.02 * v.abs()).max(1e-9)
}

/// Round-off level of the difference quotient at entry `i`: a few ulps of
/// an energy sum of `terms` terms of size `scale`, divided by the step.
pub fn fd_noise(u: &[f64], i: usize, scale: f64, terms: usize) -> f64 {
    terms as f64 * f64::EPSILON * scale / fd_step(u[i])
}

/// Largest relative deviation `|a - b| / max(|a|, |b|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
