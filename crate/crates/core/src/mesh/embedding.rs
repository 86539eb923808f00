//! Discrete Sobolev embedding constants `σ_ℓ = sup |u|_ℓ / ‖u‖_p` over the
//! P1 space of a given mesh.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gradient_power_integral, power_integral, DiscreteFunction, Mesh};
use crate::error::{Error, Result};
use crate::functional::assemble_gradient_power;
use crate::linesearch::LineSearch;
use crate::model::critical_exponent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingOptions {
    /// Random starts in addition to the ground-state candidate.
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the first-order gain `⟨∇f, d⟩` of the log-ratio drops below this.
    pub tol: f64,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            starts: 10,
            seed: 0,
            max_iter: 5_000,
            tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEstimate {
    pub value: f64,
    /// `false` if the best ascent run hit `max_iter` before `tol`.
    pub converged: bool,
    pub starts: usize,
}

/// log |u|_ℓ − log ‖u‖_p and its Euclidean gradient.
fn log_ratio(mesh: &Mesh, u: &[f64], p: f64, ell: f64, grad: Option<&mut Vec<f64>>) -> f64 {
    let lp = power_integral(mesh, u, ell);
    let sp = gradient_power_integral(mesh, u, p);
    if let Some(g) = grad {
        g.clear();
        g.extend(
            mesh.lumped_mass()
                .iter()
                .zip(u)
                .map(|(m, v)| m * crate::functional::signed_pow(*v, ell - 1.0) / lp),
        );
        let mut dgrad = vec![0.0; u.len()];
        assemble_gradient_power(mesh, u, p, &mut dgrad);
        for (gi, di) in g.iter_mut().zip(&dgrad) {
            *gi -= di / sp;
        }
    }
    lp.ln() / ell - sp.ln() / p
}

fn ascend(mesh: &Mesh, start: Vec<f64>, p: f64, ell: f64, opts: &EmbeddingOptions) -> (f64, bool) {
    let metric = mesh.sobolev();
    let normalize = |u: &mut Vec<f64>| {
        let s = gradient_power_integral(mesh, u, p).powf(1.0 / p);
        u.iter_mut().for_each(|v| *v /= s);
    };
    // The ratio is 0-homogeneous, so steps are taken on the raw vector and
    // renormalized afterwards; the line search minimizes its negative.
    let eval = |w: &[f64], g: Option<&mut [f64]>| {
        let mut buf = Vec::new();
        let f = log_ratio(mesh, w, p, ell, g.is_some().then_some(&mut buf));
        if let Some(g) = g {
            g.iter_mut().zip(&buf).for_each(|(a, b)| *a = -b);
        }
        -f
    };
    let mut u = start;
    normalize(&mut u);
    let mut grad = Vec::new();
    let mut f = log_ratio(mesh, &u, p, ell, Some(&mut grad));
    let mut ls = LineSearch::new(1e-4);
    for _ in 0..opts.max_iter {
        let dir: Vec<f64> = metric.riesz(&grad).into_iter().map(|v| -v).collect();
        let gain: f64 = -grad.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        if gain <= opts.tol {
            return (f, true);
        }
        let Some((mut next, _, _)) = ls.search(eval, &u, &dir, -f, gain) else {
            // No admissible ascent step left at double precision.
            return (f, gain <= 1e3 * opts.tol);
        };
        normalize(&mut next);
        u = next;
        f = log_ratio(mesh, &u, p, ell, Some(&mut grad));
    }
    (f, false)
}

/// Estimates the discrete embedding constant of `‖·‖_p` into `|·|_ell` on `mesh`.
///
/// Runs Armijo ascent of the scale-invariant ratio, preconditioned by the
/// H¹₀ Riesz map, from the ground-state shape and `opts.starts` random
/// vectors, and returns the best ratio found.
pub fn estimate_embedding_constant(
    mesh: &Arc<Mesh>,
    p: f64,
    ell: f64,
    opts: &EmbeddingOptions,
) -> Result<EmbeddingEstimate> {
    let crit = critical_exponent(mesh.dim(), p);
    if !(ell >= 1.0 && ell < crit && p > 1.0) {
        return Err(Error::InvalidProblem(format!(
            "embedding exponent {ell} must lie in [1, {crit}) for p = {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidates = vec![DiscreteFunction::ground_state(mesh).into_values()];
    for _ in 0..opts.starts {
        candidates.push((0..mesh.unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let mut best = (f64::NEG_INFINITY, false);
    for start in candidates {
        let (f, ok) = ascend(mesh, start, p, ell, opts);
        if f > best.0 {
            best = (f, ok);
        }
    }
    if !best.1 {
        log::warn!("embedding ascent for ell = {ell} did not reach tolerance");
    }
    Ok(EmbeddingEstimate {
        value: best.0.exp(),
        converged: best.1,
        starts: opts.starts + 1,
    })
}
