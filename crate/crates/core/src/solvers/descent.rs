use crate::functional::{EnergyVariant, SignRestriction};
use crate::linesearch::LineSearch;
use crate::mesh::DiscreteFunction;

use super::{
    Solution, SolutionKind, SolverContext, Stage, StageFailure, TraceRow,
};

/// `σv` with negative truncated energy, halving σ from `δ/|v|_∞`.
pub fn find_negative_start(
    ctx: &SolverContext,
    sign: SignRestriction,
) -> Result<DiscreteFunction, StageFailure> {
    let v = ctx.template(sign);
    let variant = EnergyVariant::signed(sign).with_truncation(ctx.profile);
    let delta = if ctx.hypotheses.delta > 0.0 { ctx.hypotheses.delta } else { 1.0 };
    let mut sigma = delta / v.norm_sup();
    for _ in 0..60 {
        let u = v.scaled(sigma);
        if ctx.functional.energy(u.values(), &variant) < 0.0 {
            return Ok(u);
        }
        sigma *= 0.5;
    }
    Err(StageFailure::new(
        Stage::NegativeStart,
        sign,
        "no negative truncated energy after 60 halvings; lambda may be too close to lambda1",
    ))
}

/// Monotone descent on the truncated energy starting below zero.
///
/// The returned solution carries the untruncated energy and residual of the
/// sign variant; the two agree with the truncated ones on `{F < 0}`.
pub fn minimize_truncated(
    ctx: &SolverContext,
    u_init: &DiscreteFunction,
    sign: SignRestriction,
) -> Result<Solution, StageFailure> {
    let fail = |reason: String| StageFailure::new(Stage::Minimize, sign, reason);
    let f = &ctx.functional;
    let opts = &ctx.options;
    let variant = EnergyVariant::signed(sign).with_truncation(ctx.profile);

    let mut u = u_init.values().to_vec();
    let mut grad = vec![0.0; u.len()];
    let mut e = f.evaluate(&u, &variant, Some(&mut grad));
    if !(e < 0.0) {
        return Err(fail(format!("initial truncated energy {e:.3e} is not negative")));
    }

    let mut ls = LineSearch::new(opts.armijo);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..=opts.max_iter {
        iterations = it;
        let res = f.residual_of_gradient(&grad);
        if opts.trace {
            trace.push(TraceRow {
                iteration: it,
                energy: e,
                residual: res,
                seminorm: ctx.seminorm(&u),
            });
        }
        if res <= opts.tol {
            converged = true;
            break;
        }
        if it == opts.max_iter {
            break;
        }
        let d = ctx.direction(&grad);
        let slope: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
        let eval = |w: &[f64], g: Option<&mut [f64]>| f.evaluate(w, &variant, g);
        let Some((next, e_next, _)) = ls.search(eval, &u, &d, e, slope) else {
            log::warn!("{sign:?} minimization stalled at residual {res:.3e}");
            break;
        };
        if !(e_next < 0.0) {
            return Err(fail(format!("energy left the negative region ({e_next:.3e})")));
        }
        u = next;
        e = f.evaluate(&u, &variant, Some(&mut grad));
    }
    if !converged {
        log::warn!("{sign:?} minimization stopped after {iterations} iterations without reaching tol");
    }

    let plain = variant.untruncated();
    let seminorm = ctx.seminorm(&u);
    let energy = f.energy(&u, &plain);
    let residual = f.residual(&u, &plain);
    let sup_norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Solution {
        u: DiscreteFunction::from_values(ctx.mesh(), u).expect("length preserved"),
        energy,
        residual,
        seminorm,
        sup_norm,
        kind: SolutionKind::Minimum,
        sign: sign.into(),
        iterations,
        converged,
        trace,
    })
}

/// Far endpoint `e = σ̄v₁` of the mountain-pass paths.
#[derive(Debug, Clone)]
pub struct FarPoint {
    pub e: DiscreteFunction,
    pub sigma: f64,
    pub doublings: usize,
}

/// Doubles σ from 1 until `𝒥(σv₁) < 𝒥(u₀)` and `|∇(σv₁)|_p > R₁`.
pub fn find_far_point(
    ctx: &SolverContext,
    u0: &Solution,
    sign: SignRestriction,
) -> Result<FarPoint, StageFailure> {
    let v = ctx.template(sign);
    let variant = EnergyVariant::signed(sign);
    let mut sigma = 1.0;
    for doublings in 0..=60 {
        let e = v.scaled(sigma);
        let energy = ctx.functional.energy(e.values(), &variant);
        if energy < u0.energy && ctx.seminorm(e.values()) > ctx.profile.r1 {
            log::debug!("{sign:?} far point after {doublings} doublings (sigma = {sigma})");
            return Ok(FarPoint { e, sigma, doublings });
        }
        sigma *= 2.0;
    }
    Err(StageFailure::new(
        Stage::FarPoint,
        sign,
        "energy along the template ray stayed above J(u0) after 60 doublings",
    ))
}
