//! Scalar machinery of the truncation argument: the lower-bound curve
//! `h(x) = α₁x^p − (λ/q)c_q^q x^q − (1/s)c_s^s x^s`, its positive window
//! `(R₀, R₁)`, the threshold λ₁ and the smooth cutoff τ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HCurveConstants {
    pub alpha1: f64,
    pub c_q: f64,
    pub c_s: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl HCurveConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.alpha1, self.c_q, self.c_s, self.lambda]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive {
            return Err(Error::InvalidProblem(
                "h-curve constants alpha1, c_q, c_s, lambda must be positive".into(),
            ));
        }
        if !(1.0 < self.q && self.q < self.p && self.p < self.s && self.s.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "h-curve exponents must satisfy 1 < q < p < s, got q = {}, p = {}, s = {}",
                self.q, self.p, self.s
            )));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    fn coeff_q(&self) -> f64 {
        self.lambda / self.q * self.c_q.powf(self.q)
    }

    fn coeff_s(&self) -> f64 {
        self.c_s.powf(self.s) / self.s
    }

    /// Below this point the concave term dominates: `h < 0` on `(0, x_q]`.
    fn concave_scale(&self) -> f64 {
        (self.coeff_q() / self.alpha1).powf(1.0 / (self.p - self.q))
    }

    /// Above this point the convex term dominates: `h < 0` on `[x_s, ∞)`.
    fn convex_scale(&self) -> f64 {
        (self.alpha1 / self.coeff_s()).powf(1.0 / (self.s - self.p))
    }
}

pub fn h_eval(c: &HCurveConstants, x: f64) -> f64 {
    c.alpha1 * x.powf(c.p) - c.coeff_q() * x.powf(c.q) - c.coeff_s() * x.powf(c.s)
}

/// `h̄(x) = α₁x^p − (λ/q)c_q^q x^q − (1/s)c_s^s x^s τ(x)`.
pub fn h_bar_eval(c: &HCurveConstants, tp: &TruncationProfile, x: f64) -> f64 {
    c.alpha1 * x.powf(c.p) - c.coeff_q() * x.powf(c.q) - c.coeff_s() * x.powf(c.s) * tp.tau(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HAnalysis {
    pub x_max: f64,
    pub h_max: f64,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
}

impl HAnalysis {
    /// The cutoff profile on `[R₀, R₁]`, when the window exists.
    pub fn profile(&self) -> Option<TruncationProfile> {
        match (self.r0, self.r1) {
            (Some(r0), Some(r1)) => TruncationProfile::new(r0, r1).ok(),
            _ => None,
        }
    }
}

const SCAN_POINTS: usize = 4096;
/// Relative bracket width at which the root and threshold bisections stop.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-13;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn scan_range(c: &HCurveConstants) -> (f64, f64) {
    let (xq, xs) = (c.concave_scale(), c.convex_scale());
    (1e-3 * xq.min(xs), 2.0 * xq.max(xs))
}

/// Golden-section maximization of `h` over `[lo, hi]` in log coordinates.
fn golden_max(c: &HCurveConstants, lo: f64, hi: f64) -> (f64, f64) {
    let f = |y: f64| h_eval(c, y.exp());
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-14 * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let y = 0.5 * (a + b);
    (y.exp(), f(y))
}

/// Bisection for the sign change of `h` on `[neg, pos]` (`h(neg) <= 0 < h(pos)`).
fn bisect_root(c: &HCurveConstants, mut neg: f64, mut pos: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (neg + pos);
        if mid == neg || mid == pos || (pos - neg).abs() <= tol * mid {
            break;
        }
        if h_eval(c, mid) > 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    0.5 * (neg + pos)
}

/// Locates the maximum of `h` and, when it is positive, its two zeros.
pub fn analyze_h(c: &HCurveConstants) -> Result<HAnalysis> {
    analyze_h_with_tol(c, DEFAULT_BISECTION_TOL)
}

/// [`analyze_h`] with an explicit relative tolerance for the zeros.
pub fn analyze_h_with_tol(c: &HCurveConstants, tol: f64) -> Result<HAnalysis> {
    c.validate()?;
    check_tol(tol)?;
    let (lo, hi) = scan_range(c);
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    // h' = x^{q-1}(pα₁x^{p-q} - λc_q^q - c_s^s x^{s-q}) changes sign at most
    // twice, so h decreases, increases, then decreases. Its only local
    // maximum is interior; the near-zero tail at small x must not win even
    // when that maximum is slightly negative.
    let values: Vec<f64> = grid.iter().map(|&x| h_eval(c, x)).collect();
    let imax = (1..SCAN_POINTS - 1)
        .filter(|&i| values[i] >= values[i - 1] && values[i] >= values[i + 1])
        .max_by(|&i, &j| values[i].total_cmp(&values[j]));
    let Some(imax) = imax else {
        // monotone on the scan range: no interior maximum
        let i = if values[0] >= values[SCAN_POINTS - 1] { 0 } else { SCAN_POINTS - 1 };
        return Ok(HAnalysis {
            x_max: grid[i],
            h_max: values[i],
            r0: None,
            r1: None,
        });
    };
    let a = grid[imax - 1];
    let b = grid[imax + 1];
    let (x_max, h_max) = golden_max(c, a, b);

    if !(h_max > 0.0) {
        return Ok(HAnalysis {
            x_max,
            h_max,
            r0: None,
            r1: None,
        });
    }
    // h < 0 at both ends of the scan range and g = h/x^q is unimodal, so
    // exactly one zero lies on each side of the maximum.
    let r0 = bisect_root(c, lo, x_max, tol);
    let r1 = bisect_root(c, hi, x_max, tol);
    Ok(HAnalysis {
        x_max,
        h_max,
        r0: Some(r0),
        r1: Some(r1),
    })
}

/// The threshold λ₁ at which the maximum of `h` is exactly zero.
///
/// `c.lambda` is ignored. `h` decreases pointwise in λ, so bisection on the
/// sign of the maximum converges to the unique threshold.
pub fn lambda1(c: &HCurveConstants) -> Result<f64> {
    lambda1_with_tol(c, DEFAULT_BISECTION_TOL)
}

/// [`lambda1`] with an explicit relative tolerance on the threshold.
pub fn lambda1_with_tol(c: &HCurveConstants, tol: f64) -> Result<f64> {
    c.with_lambda(1.0).validate()?;
    check_tol(tol)?;
    let positive = |lambda: f64| -> Result<bool> {
        Ok(analyze_h_with_tol(&c.with_lambda(lambda), tol)?.h_max > 0.0)
    };
    let mut lo = 1.0;
    let mut hi = 1.0;
    if positive(1.0)? {
        while positive(hi)? {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        while !positive(lo)? {
            hi = lo;
            lo *= 0.5;
        }
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("bisection tolerance {tol} must lie in (0, 1)")))
    }
}

/// Window `[R₀, R₁]` of the smooth nonincreasing cutoff τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationProfile {
    pub r0: f64,
    pub r1: f64,
}

impl TruncationProfile {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < r1 && r1.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "truncation window needs 0 < R0 < R1, got R0 = {r0}, R1 = {r1}"
            )));
        }
        Ok(Self { r0, r1 })
    }

    /// `ψ(R₁−x) / (ψ(R₁−x) + ψ(x−R₀))` with `ψ(t) = exp(−1/t)` for `t > 0`.
    pub fn tau(&self, x: f64) -> f64 {
        if x <= self.r0 {
            return 1.0;
        }
        if x >= self.r1 {
            return 0.0;
        }
        let z = 1.0 / (self.r1 - x) - 1.0 / (x - self.r0);
        logistic(-z)
    }

    pub fn tau_prime(&self, x: f64) -> f64 {
        if x <= self.r0 || x >= self.r1 {
            return 0.0;
        }
        let (a, b) = (self.r1 - x, x - self.r0);
        let z = 1.0 / a - 1.0 / b;
        -logistic(z) * logistic(-z) * (1.0 / (a * a) + 1.0 / (b * b))
    }
}

#[inline]
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn tau_eval(tp: &TruncationProfile, x: f64) -> f64 {
    tp.tau(x)
}

pub fn tau_prime_eval(tp: &TruncationProfile, x: f64) -> f64 {
    tp.tau_prime(x)
}
