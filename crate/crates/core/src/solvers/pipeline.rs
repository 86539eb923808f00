use crate::functional::{EnergyVariant, SignRestriction};
use crate::mesh::DiscreteFunction;

use super::{
    find_far_point, find_negative_start, minimize_truncated, mountain_pass, Solution, SolutionKind,
    SolverContext, Stage, StageFailure,
};

/// Solutions of one signed run, in the order: minima (+, −), then mountain-pass points (+, −).
#[derive(Debug, Clone)]
pub struct SignedRun {
    pub solutions: Vec<Solution>,
    pub failures: Vec<StageFailure>,
    /// 4 when the mountain-pass stage is enabled and (H7) certified, else 2.
    pub expected: usize,
}

impl SignedRun {
    pub fn find(&self, kind: SolutionKind, sign: SignRestriction) -> Option<&Solution> {
        let tag = sign.into();
        self.solutions.iter().find(|s| s.kind == kind && s.sign == tag)
    }
}

/// Checks sign purity, zeroes opposite-sign round-off and re-evaluates
/// energy and residual with the full nonlinearity.
fn confirm(ctx: &SolverContext, mut sol: Solution, sign: SignRestriction) -> Result<Solution, StageFailure> {
    let fail = |reason: String| StageFailure::new(Stage::Verify, sign, reason);
    let tol = ctx.options.sign_tol;
    let values = sol.u.values();
    let worst = match sign {
        SignRestriction::Plus => values.iter().fold(0.0f64, |m, v| m.min(*v)),
        SignRestriction::Minus => -values.iter().fold(0.0f64, |m, v| m.max(*v)),
        SignRestriction::Full => 0.0,
    };
    if worst < -tol {
        return Err(fail(format!(
            "{:?} solution has opposite-sign nodal value {worst:.3e}",
            sol.kind
        )));
    }
    let cleaned: Vec<f64> = match sign {
        SignRestriction::Plus => values.iter().map(|v| v.max(0.0)).collect(),
        SignRestriction::Minus => values.iter().map(|v| v.min(0.0)).collect(),
        SignRestriction::Full => values.to_vec(),
    };
    let f = &ctx.functional;
    sol.energy = f.energy(&cleaned, &EnergyVariant::FULL);
    sol.residual = f.residual(&cleaned, &EnergyVariant::FULL);
    sol.seminorm = ctx.seminorm(&cleaned);
    sol.sup_norm = cleaned.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    sol.u = DiscreteFunction::from_values(ctx.mesh(), cleaned).expect("length preserved");
    if !(sol.residual <= ctx.options.verify_tol) {
        return Err(fail(format!(
            "{:?} full-functional residual {:.3e} exceeds {:.1e}",
            sol.kind, sol.residual, ctx.options.verify_tol
        )));
    }
    match sol.kind {
        SolutionKind::Minimum => {
            if !(sol.energy < 0.0 && sol.seminorm < ctx.profile.r0) {
                return Err(fail(format!(
                    "minimum has energy {:.3e} and seminorm {:.3e} (R0 = {:.3e})",
                    sol.energy, sol.seminorm, ctx.profile.r0
                )));
            }
        }
        SolutionKind::MountainPass => {
            if !(sol.energy > 0.0) {
                return Err(fail(format!("mountain-pass energy {:.3e} is not positive", sol.energy)));
            }
        }
    }
    Ok(sol)
}

fn run_sign(ctx: &SolverContext, sign: SignRestriction) -> (Vec<Solution>, Vec<StageFailure>) {
    let mut solutions = Vec::new();
    let mut failures = Vec::new();
    let minimum = find_negative_start(ctx, sign)
        .and_then(|start| minimize_truncated(ctx, &start, sign))
        .and_then(|sol| {
            if sol.converged {
                Ok(sol)
            } else {
                Err(StageFailure::new(
                    Stage::Minimize,
                    sign,
                    format!("descent stopped at residual {:.3e}", sol.residual),
                ))
            }
        })
        .and_then(|sol| confirm(ctx, sol, sign));
    let u0 = match minimum {
        Ok(u0) => u0,
        Err(e) => {
            failures.push(e);
            return (solutions, failures);
        }
    };
    solutions.push(u0.clone());

    if !(ctx.options.mountain_pass && ctx.hypotheses.usable_for_mountain_pass()) {
        return (solutions, failures);
    }
    let star = find_far_point(ctx, &u0, sign)
        .and_then(|far| mountain_pass(ctx, &u0, &far.e, sign))
        .and_then(|sol| confirm(ctx, sol, sign))
        .and_then(|sol| {
            // Distinct from u₀ if the two are farther apart than R₀, or if the
            // R₀-sphere separates them (u₀ inside, u* outside).
            let r0 = ctx.profile.r0;
            let gap = ctx.seminorm(&u0.u.add_scaled(-1.0, &sol.u).into_values());
            if gap > r0 || (u0.seminorm < r0 && sol.seminorm > r0) {
                Ok(sol)
            } else {
                Err(StageFailure::new(
                    Stage::Verify,
                    sign,
                    format!(
                        "mountain-pass point not separated from the minimum (gap {gap:.3e}, seminorm {:.3e}, R0 {r0:.3e})",
                        sol.seminorm
                    ),
                ))
            }
        });
    match star {
        Ok(s) => solutions.push(s),
        Err(e) => failures.push(e),
    }
    (solutions, failures)
}

/// Runs minimization and, when enabled and certified, the mountain-pass
/// stage for `𝒥₊` and `𝒥₋`. The two sign branches run concurrently.
pub fn solve_signed(ctx: &SolverContext) -> SignedRun {
    let mp = ctx.options.mountain_pass && ctx.hypotheses.usable_for_mountain_pass();
    let expected = if mp { 4 } else { 2 };
    if !ctx.hypotheses.usable_for_minimum() {
        let reason = "structural hypotheses (H0)-(H6) not certified for this family";
        return SignedRun {
            solutions: Vec::new(),
            failures: [SignRestriction::Plus, SignRestriction::Minus]
                .into_iter()
                .map(|s| StageFailure::new(Stage::NegativeStart, s, reason))
                .collect(),
            expected,
        };
    }
    let ((plus, plus_fail), (minus, minus_fail)) = std::thread::scope(|scope| {
        let h = scope.spawn(|| run_sign(ctx, SignRestriction::Minus));
        let plus = run_sign(ctx, SignRestriction::Plus);
        (plus, h.join().expect("minus branch panicked"))
    });
    let mut solutions: Vec<Solution> = plus.into_iter().chain(minus).collect();
    solutions.sort_by_key(|s| (s.kind == SolutionKind::MountainPass, s.sign != super::SignTag::Positive));
    SignedRun {
        solutions,
        failures: plus_fail.into_iter().chain(minus_fail).collect(),
        expected,
    }
}
