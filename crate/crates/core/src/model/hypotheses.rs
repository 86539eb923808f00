//! Sampling-based certification of the structural inequalities a Lagrangian
//! must satisfy for the minimization and mountain-pass pipelines.
//!
//! Every constant is an empirical infimum or supremum over a documented box
//! `|t| <= t_max`, `|ξ| <= xi_max`. Extremal witnesses are polished by a
//! compass search so that the reported constants are sharp to near machine
//! precision for smooth families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::family::{dot, norm, Lagrangian, LagrangianValue, Vec2};

/// Ratios with `|ξ|` below this are skipped (both sides vanish for built-ins).
const XI_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Finite evaluation (Carathéodory regularity proxy).
    H0,
    /// Coercivity `A >= α₁|ξ|^p`.
    H2,
    /// `A <= η₁ a·ξ`.
    H3,
    /// `a·ξ + A_t t >= α₂ a·ξ`.
    H4,
    /// `A <= η₂|ξ|^p` for `|t| <= δ`.
    H5,
    /// Strict monotonicity of `a` in ξ.
    H6,
    /// `sA - a·ξ - A_t t >= α₃ a·ξ`.
    H7,
}

impl Hypothesis {
    /// Hypotheses the negative-level minimum relies on.
    pub fn needed_for_minimum(self) -> bool {
        !matches!(self, Hypothesis::H7)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec2,
    pub t: f64,
    pub xi: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    pub witness: Witness,
    pub value: f64,
}

/// Box and size of the sample used by [`check_hypotheses`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    pub dim: usize,
    pub t_max: f64,
    pub xi_max: f64,
    pub samples: usize,
    pub seed: u64,
    /// Polish extremal witnesses by compass search.
    pub refine: bool,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            dim: 1,
            t_max: 10.0,
            xi_max: 10.0,
            samples: 10_000,
            seed: 0,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub alpha1: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub delta: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// `s - α₃/η₁`, the growth exponent of `σ ↦ A(x, σt, σξ)`.
    pub mp_exponent: f64,
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl HypothesisReport {
    /// No violation among (H0)–(H6).
    pub fn usable_for_minimum(&self) -> bool {
        !self.violations.iter().any(|v| v.hypothesis.needed_for_minimum())
    }

    /// No violation at all, (H7) included.
    pub fn usable_for_mountain_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Sample {
    w: Witness,
    v: LagrangianValue,
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec2 {
    if dim == 1 {
        return [if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0];
    }
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    [angle.cos(), angle.sin()]
}

fn build_samples(plan: &SamplingPlan, rng: &mut ChaCha8Rng) -> Vec<Witness> {
    let mut out = Vec::with_capacity(plan.samples + 6000);
    let random_x = |rng: &mut ChaCha8Rng| -> Vec2 {
        if plan.dim == 1 {
            [rng.random::<f64>(), 0.0]
        } else {
            [rng.random::<f64>(), rng.random::<f64>()]
        }
    };
    // Structured part: a t-grid (plus the δ candidates) crossed with
    // log-spaced gradient magnitudes down to the near-zero regime.
    let mut ts: Vec<f64> = (0..=200)
        .map(|i| -plan.t_max + 2.0 * plan.t_max * i as f64 / 200.0)
        .collect();
    let mut d = 1.0;
    for _ in 0..21 {
        ts.push(d);
        ts.push(-d);
        d *= 0.5;
    }
    let mags: Vec<f64> = (0..25)
        .map(|k| plan.xi_max * 10f64.powf(-6.0 + 6.0 * k as f64 / 24.0))
        .collect();
    for &t in &ts {
        for &m in &mags {
            let dir = random_direction(rng, plan.dim);
            out.push(Witness {
                x: random_x(rng),
                t,
                xi: [m * dir[0], m * dir[1]],
            });
        }
    }
    for k in 0..plan.samples {
        let t = if k % 2 == 0 {
            rng.random_range(-plan.t_max..=plan.t_max)
        } else {
            rng.random_range(-1.0..=1.0)
        };
        let m = if k % 5 == 0 {
            plan.xi_max * 1e-4 * rng.random::<f64>()
        } else {
            plan.xi_max * rng.random::<f64>()
        };
        let dir = random_direction(rng, plan.dim);
        out.push(Witness {
            x: random_x(rng),
            t,
            xi: [m * dir[0], m * dir[1]],
        });
    }
    out
}

/// A scalar ratio evaluated at a witness; `None` where it is undefined.
type Ratio<'a> = dyn Fn(&LagrangianValue, &Witness) -> Option<f64> + 'a;

/// Compass search minimizing `f` over (t, ξ) inside the sampling box.
fn compass_minimize(
    family: &dyn Lagrangian,
    plan: &SamplingPlan,
    ratio: &Ratio<'_>,
    start: Witness,
    start_value: f64,
) -> (Witness, f64) {
    let eval = |w: &Witness| -> Option<f64> {
        if w.t.abs() > plan.t_max || norm(w.xi) > plan.xi_max {
            return None;
        }
        let v = family.eval(w.x, w.t, w.xi);
        if !v.is_finite() {
            return None;
        }
        ratio(&v, w)
    };
    let mut best = start;
    let mut best_val = start_value;
    let coords = 1 + plan.dim;
    let mut steps = [0.05 * plan.t_max, 0.05 * plan.xi_max, 0.05 * plan.xi_max];
    for _ in 0..2000 {
        let mut improved = false;
        for c in 0..coords {
            for sign in [1.0, -1.0] {
                let mut trial = best;
                match c {
                    0 => trial.t += sign * steps[0],
                    k => trial.xi[k - 1] += sign * steps[k],
                }
                if let Some(val) = eval(&trial) {
                    if val < best_val {
                        best = trial;
                        best_val = val;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
            if steps[0] < 1e-14 * plan.t_max.max(1.0) && steps[1] < 1e-14 * plan.xi_max.max(1.0) {
                break;
            }
        }
    }
    (best, best_val)
}

struct Extremum {
    value: f64,
    witness: Option<Witness>,
}

impl Extremum {
    fn new() -> Self {
        Self {
            value: f64::INFINITY,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, w: &Witness) {
        if value < self.value {
            self.value = value;
            self.witness = Some(*w);
        }
    }
}

/// Infimum of `ratio` over the samples, optionally polished.
fn infimum(
    family: &dyn Lagrangian,
    plan: &SamplingPlan,
    samples: &[Sample],
    ratio: &Ratio<'_>,
) -> Extremum {
    let mut ext = Extremum::new();
    for s in samples {
        if let Some(r) = ratio(&s.v, &s.w) {
            ext.offer(r, &s.w);
        }
    }
    if plan.refine {
        if let Some(w) = ext.witness {
            let (w2, v2) = compass_minimize(family, plan, ratio, w, ext.value);
            ext.offer(v2, &w2);
        }
    }
    ext
}

/// Estimates the structural constants of `family` by sampling.
///
/// Any non-positive infimum, failed monotonicity pair or non-finite
/// evaluation is recorded as a [`Violation`] with its witness point.
pub fn check_hypotheses(
    family: &dyn Lagrangian,
    p: f64,
    s: f64,
    plan: &SamplingPlan,
) -> HypothesisReport {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let witnesses = build_samples(plan, &mut rng);
    let mut violations = Vec::new();

    let mut samples = Vec::with_capacity(witnesses.len());
    for w in witnesses {
        let v = family.eval(w.x, w.t, w.xi);
        if !v.is_finite() {
            violations.push(Violation {
                hypothesis: Hypothesis::H0,
                witness: w,
                value: f64::NAN,
            });
            continue;
        }
        samples.push(Sample { w, v });
    }

    let xi_ok = |w: &Witness| norm(w.xi) >= XI_FLOOR;
    let coercivity = |v: &LagrangianValue, w: &Witness| {
        xi_ok(w).then(|| v.density / norm(w.xi).powf(p))
    };
    let work = |v: &LagrangianValue, w: &Witness| dot(v.flux, w.xi);

    // (H3) needs a·ξ > 0 wherever ξ ≠ 0; record the first failure.
    if let Some(bad) = samples
        .iter()
        .find(|smp| xi_ok(&smp.w) && work(&smp.v, &smp.w) <= 0.0)
    {
        violations.push(Violation {
            hypothesis: Hypothesis::H3,
            witness: bad.w,
            value: work(&bad.v, &bad.w),
        });
    }
    let ratio_ok = |v: &LagrangianValue, w: &Witness| xi_ok(w) && work(v, w) > 0.0;

    let alpha1 = infimum(family, plan, &samples, &coercivity);
    let eta1 = infimum(family, plan, &samples, &|v, w| {
        ratio_ok(v, w).then(|| -v.density / work(v, w))
    });
    let alpha2 = infimum(family, plan, &samples, &|v, w| {
        ratio_ok(v, w).then(|| (work(v, w) + v.dt * w.t) / work(v, w))
    });
    let alpha3 = infimum(family, plan, &samples, &|v, w| {
        ratio_ok(v, w).then(|| (s * v.density - work(v, w) - v.dt * w.t) / work(v, w))
    });

    let mut push_if_nonpositive = |h: Hypothesis, e: &Extremum, value: f64| {
        if !(value > 0.0) {
            if let Some(w) = e.witness {
                violations.push(Violation {
                    hypothesis: h,
                    witness: w,
                    value,
                });
            }
        }
    };
    push_if_nonpositive(Hypothesis::H2, &alpha1, alpha1.value);
    push_if_nonpositive(Hypothesis::H3, &eta1, -eta1.value);
    push_if_nonpositive(Hypothesis::H4, &alpha2, alpha2.value);
    push_if_nonpositive(Hypothesis::H7, &alpha3, alpha3.value);

    // (H5): largest δ on the halving grid with a finite sampled sup.
    let mut delta = 0.0;
    let mut eta2 = f64::INFINITY;
    let mut d = 1.0;
    for _ in 0..21 {
        let mut sup = f64::NEG_INFINITY;
        let mut seen = false;
        for smp in samples.iter().filter(|smp| smp.w.t.abs() <= d) {
            if let Some(r) = coercivity(&smp.v, &smp.w) {
                sup = sup.max(r);
                seen = true;
            }
        }
        if seen && sup.is_finite() {
            delta = d;
            eta2 = sup;
            if plan.refine {
                let sub = SamplingPlan { t_max: d, ..*plan };
                let start = samples
                    .iter()
                    .filter(|smp| smp.w.t.abs() <= d)
                    .find(|smp| coercivity(&smp.v, &smp.w) == Some(sup))
                    .map(|smp| smp.w);
                if let Some(w) = start {
                    let (_, v) =
                        compass_minimize(family, &sub, &|v, w| coercivity(v, w).map(|r| -r), w, -sup);
                    eta2 = eta2.max(-v);
                }
            }
            break;
        }
        d *= 0.5;
    }
    if !(eta2.is_finite() && eta2 > 0.0) {
        violations.push(Violation {
            hypothesis: Hypothesis::H5,
            witness: Witness {
                x: [0.0, 0.0],
                t: 0.0,
                xi: [0.0, 0.0],
            },
            value: eta2,
        });
    }

    // (H6): each sample paired with the next one's gradient at the same (x, t).
    for pair in samples.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let xi_star = b.w.xi;
        let diff = [a.w.xi[0] - xi_star[0], a.w.xi[1] - xi_star[1]];
        if norm(diff) < XI_FLOOR {
            continue;
        }
        let other = family.eval(a.w.x, a.w.t, xi_star);
        let mono = dot(
            [a.v.flux[0] - other.flux[0], a.v.flux[1] - other.flux[1]],
            diff,
        );
        if !(mono > 0.0) {
            violations.push(Violation {
                hypothesis: Hypothesis::H6,
                witness: a.w,
                value: mono,
            });
            break;
        }
    }

    let eta1_value = -eta1.value;
    HypothesisReport {
        alpha1: alpha1.value,
        eta1: eta1_value,
        eta2,
        delta,
        alpha2: alpha2.value,
        alpha3: alpha3.value,
        mp_exponent: s - alpha3.value / eta1_value,
        samples: samples.len(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LagrangianFamily;
    use approx::assert_relative_eq;

    #[test]
    fn p_laplacian_constants_p2() {
        let f = LagrangianFamily::PLaplacian { p: 2.0 };
        let r = check_hypotheses(&f, 2.0, 4.0, &SamplingPlan::default());
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_relative_eq!(r.alpha1, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.eta1, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.alpha2, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.alpha3, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.mp_exponent, 2.0, max_relative = 1e-12);
        assert_eq!(r.delta, 1.0);
        assert_relative_eq!(r.eta2, 0.5, max_relative = 1e-12);
        assert!(r.samples >= 10_000);
    }

    #[test]
    fn p_laplacian_constants_p3() {
        let f = LagrangianFamily::PLaplacian { p: 3.0 };
        let plan = SamplingPlan { dim: 2, ..Default::default() };
        let r = check_hypotheses(&f, 3.0, 5.0, &plan);
        assert!(r.violations.is_empty());
        assert_relative_eq!(r.alpha3, 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.eta1, 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.mp_exponent, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn weighted_family_is_certified() {
        let f = LagrangianFamily::WeightedPLaplacian { p: 2.0, kappa: 0.5 };
        let r = check_hypotheses(&f, 2.0, 4.0, &SamplingPlan::default());
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        for c in [r.alpha1, r.eta1, r.eta2, r.alpha2, r.alpha3, r.delta] {
            assert!(c > 0.0);
        }
        assert!(r.mp_exponent < 4.0);
        // α₁ = 1/p at t = 0; η₁ = 1/p everywhere; α₂ = 1 at t = 0.
        assert_relative_eq!(r.alpha1, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.eta1, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.alpha2, 1.0, max_relative = 1e-12);
    }

    /// `A = -|ξ|²`: violates coercivity and monotonicity.
    struct Concave;
    impl Lagrangian for Concave {
        fn eval(&self, _x: Vec2, _t: f64, xi: Vec2) -> LagrangianValue {
            LagrangianValue {
                density: -dot(xi, xi),
                flux: [-2.0 * xi[0], -2.0 * xi[1]],
                dt: 0.0,
            }
        }
    }

    #[test]
    fn violations_are_reported_with_witnesses() {
        let plan = SamplingPlan { samples: 2000, ..Default::default() };
        let r = check_hypotheses(&Concave, 2.0, 4.0, &plan);
        let ids: Vec<_> = r.violations.iter().map(|v| v.hypothesis).collect();
        assert!(ids.contains(&Hypothesis::H2));
        assert!(ids.contains(&Hypothesis::H6));
        assert!(!r.usable_for_minimum());
        let h2 = r.violations.iter().find(|v| v.hypothesis == Hypothesis::H2).unwrap();
        assert!(norm(h2.witness.xi) > 0.0);
    }

    /// Coercive but with (H7) failing: `s A - a·ξ < 0` when s < p.
    #[test]
    fn h7_alone_disables_mountain_pass_only() {
        let f = LagrangianFamily::PLaplacian { p: 2.0 };
        let r = check_hypotheses(&f, 2.0, 1.5, &SamplingPlan { samples: 2000, ..Default::default() });
        assert!(r.usable_for_minimum());
        assert!(!r.usable_for_mountain_pass());
        assert_eq!(r.violations[0].hypothesis, Hypothesis::H7);
    }
}
