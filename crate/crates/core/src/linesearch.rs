//! Shared line search for the descent-type iterations.

/// Relative energy change below which differences are treated as round-off.
const ENERGY_NOISE: f64 = 1e-10;
/// Curvature target `|φ'(α)| ≤ CURVATURE |φ'(0)|` for the secant refinement.
const CURVATURE: f64 = 0.1;
const MAX_EVALS: usize = 60;
/// Largest expansion of the trial step within one search.
const MAX_GROWTH: f64 = 4.0;

/// Line search along `-d` for `φ(α) = E(u - αd)`.
///
/// Trial steps are placed by the secant rule on `φ'` inside a bracket, starting
/// from the last accepted step; energy-increasing trials are bisected back.
/// A step is acceptable under Armijo's condition, or, once energy differences
/// drop to round-off, under the approximate Wolfe test
/// `φ'(α) ≤ (1 - 2c)|φ'(0)|`, which only needs gradients.
pub(crate) struct LineSearch {
    pub armijo: f64,
    step: f64,
}

impl LineSearch {
    pub(crate) fn new(armijo: f64) -> Self {
        Self { armijo, step: 1.0 }
    }

    /// `eval(w, grad)` returns the energy at `w` and fills `grad` when given.
    /// `slope = g(u)·d > 0`. Returns the accepted point, its energy and the
    /// step length, or `None` when no acceptable step was found.
    pub(crate) fn search(
        &mut self,
        eval: impl Fn(&[f64], Option<&mut [f64]>) -> f64,
        u: &[f64],
        d: &[f64],
        e0: f64,
        slope: f64,
    ) -> Option<(Vec<f64>, f64, f64)> {
        self.search_capped(eval, u, d, e0, slope, f64::INFINITY)
    }

    /// [`search`](Self::search) with every trial step limited to `cap`.
    pub(crate) fn search_capped(
        &mut self,
        eval: impl Fn(&[f64], Option<&mut [f64]>) -> f64,
        u: &[f64],
        d: &[f64],
        e0: f64,
        slope: f64,
        cap: f64,
    ) -> Option<(Vec<f64>, f64, f64)> {
        if !(slope > 0.0 && cap > 0.0) {
            return None;
        }
        let c = self.armijo;
        let d0 = -slope;
        let noise = ENERGY_NOISE * e0.abs().max(f64::MIN_POSITIVE);
        let mut trial = vec![0.0; u.len()];
        let mut grad = vec![0.0; u.len()];
        // Bracket on φ': `lo` has φ' < 0, `hi` has φ' > 0 or excess energy.
        let mut lo = (0.0, d0);
        let mut hi: Option<(f64, Option<f64>)> = None;
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        let mut alpha = self.step.min(1e8).min(cap);
        let max_alpha = (MAX_GROWTH * alpha).min(cap);
        for _ in 0..MAX_EVALS {
            for ((t, a), b) in trial.iter_mut().zip(u).zip(d) {
                *t = a - alpha * b;
            }
            let e = eval(&trial, Some(&mut grad));
            let dphi = -grad.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
            let ok = e.is_finite()
                && dphi.is_finite()
                && (e <= e0 - c * alpha * slope
                    || ((e - e0).abs() <= noise && dphi <= (1.0 - 2.0 * c) * slope));
            if !ok {
                hi = Some((alpha, (dphi.is_finite() && dphi > 0.0).then_some(dphi)));
                alpha = lo.0 + 0.5 * (alpha - lo.0);
                if alpha - lo.0 <= 1e-18 * alpha.max(1.0) {
                    break;
                }
                continue;
            }
            if best.as_ref().is_none_or(|b| e <= b.1) {
                best = Some((trial.clone(), e, alpha));
            }
            if dphi.abs() <= CURVATURE * slope {
                break;
            }
            if dphi < 0.0 {
                lo = (alpha, dphi);
            } else {
                hi = Some((alpha, Some(dphi)));
            }
            alpha = match hi {
                None if lo.0 >= max_alpha => break,
                None => {
                    // secant through (0, φ'(0)) and lo, pushed outward
                    let ext = if lo.1 > d0 { lo.0 * d0 / (d0 - lo.1) } else { 4.0 * lo.0 };
                    ext.clamp(1.5 * lo.0, 4.0 * lo.0).min(max_alpha)
                }
                Some((h, dh)) => {
                    let w = h - lo.0;
                    let sec = match dh {
                        Some(dh) => lo.0 + w * (-lo.1) / (dh - lo.1),
                        None => lo.0 + 0.5 * w,
                    };
                    sec.clamp(lo.0 + 0.1 * w, h - 0.1 * w)
                }
            };
        }
        if let Some((_, _, a)) = &best {
            self.step = *a;
        }
        best
    }
}
