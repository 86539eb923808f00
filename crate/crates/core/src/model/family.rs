//! Lagrangian densities `A(x, t, ξ)` together with their partial derivatives
//! `a = ∇_ξ A` and `A_t = ∂A/∂t`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points of Ω and gradient vectors. In one dimension the second slot is 0.
pub type Vec2 = [f64; 2];

#[inline]
pub(crate) fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// The triple `(A, a, A_t)` at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianValue {
    pub density: f64,
    pub flux: Vec2,
    pub dt: f64,
}

impl LagrangianValue {
    pub fn is_finite(&self) -> bool {
        self.density.is_finite()
            && self.flux[0].is_finite()
            && self.flux[1].is_finite()
            && self.dt.is_finite()
    }
}

/// Pointwise evaluator of a quasilinear Lagrangian.
///
/// Implementors must return `flux` equal to the ξ-gradient of `density` and
/// `dt` equal to its t-derivative.
pub trait Lagrangian: Send + Sync {
    fn eval(&self, x: Vec2, t: f64, xi: Vec2) -> LagrangianValue;
}

/// Built-in families. Every variant satisfies `A(x, 0, 0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum LagrangianFamily {
    /// `A = |ξ|^p / p`.
    PLaplacian { p: f64 },
    /// `A = (1 + κ t²/(1+t²)) |ξ|^p / p`.
    WeightedPLaplacian { p: f64, kappa: f64 },
}

impl LagrangianFamily {
    /// Builds a family from its string id and named parameters.
    pub fn from_id(id: &str, p: f64, params: &BTreeMap<String, f64>) -> Result<Self> {
        let family = match id {
            "p_laplacian" | "plaplacian" => LagrangianFamily::PLaplacian { p },
            "weighted_p_laplacian" | "weightedplaplacian" => {
                let kappa = params.get("kappa").copied().unwrap_or(0.5);
                LagrangianFamily::WeightedPLaplacian { p, kappa }
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn id(&self) -> &'static str {
        match self {
            LagrangianFamily::PLaplacian { .. } => "p_laplacian",
            LagrangianFamily::WeightedPLaplacian { .. } => "weighted_p_laplacian",
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            LagrangianFamily::PLaplacian { p } | LagrangianFamily::WeightedPLaplacian { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidFamily(format!("exponent p = {p} must be finite and > 1")));
        }
        if let LagrangianFamily::WeightedPLaplacian { kappa, .. } = *self {
            if !(kappa.is_finite() && kappa >= 0.0) {
                return Err(Error::InvalidFamily(format!("kappa = {kappa} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// `true` when `A` depends on `t`; lets the assembly skip the barycentric term.
    pub fn depends_on_t(&self) -> bool {
        matches!(self, LagrangianFamily::WeightedPLaplacian { kappa, .. } if *kappa != 0.0)
    }
}

/// `|ξ|^{p-2} ξ`, taken as 0 at ξ = 0.
#[inline]
pub(crate) fn p_flux(p: f64, xi: Vec2) -> (f64, Vec2) {
    let r = norm(xi);
    if r == 0.0 {
        return (0.0, [0.0, 0.0]);
    }
    let rp = r.powf(p);
    let scale = rp / (r * r);
    (rp, [scale * xi[0], scale * xi[1]])
}

impl Lagrangian for LagrangianFamily {
    #[inline]
    fn eval(&self, _x: Vec2, t: f64, xi: Vec2) -> LagrangianValue {
        match *self {
            LagrangianFamily::PLaplacian { p } => {
                let (rp, flux) = p_flux(p, xi);
                LagrangianValue {
                    density: rp / p,
                    flux,
                    dt: 0.0,
                }
            }
            LagrangianFamily::WeightedPLaplacian { p, kappa } => {
                let (rp, flux) = p_flux(p, xi);
                let t2 = t * t;
                let w = t2 / (1.0 + t2);
                let dw = 2.0 * t / ((1.0 + t2) * (1.0 + t2));
                let weight = 1.0 + kappa * w;
                LagrangianValue {
                    density: weight * rp / p,
                    flux: [weight * flux[0], weight * flux[1]],
                    dt: kappa * dw * rp / p,
                }
            }
        }
    }
}

/// Evaluates `(A, a, A_t)`, rejecting non-finite inputs or outputs.
pub fn evaluate_lagrangian(
    family: &dyn Lagrangian,
    x: Vec2,
    t: f64,
    xi: Vec2,
) -> Result<LagrangianValue> {
    if !(t.is_finite() && xi[0].is_finite() && xi[1].is_finite()) {
        return Err(Error::InvalidFamily(format!(
            "non-finite argument t = {t}, xi = {xi:?}"
        )));
    }
    let value = family.eval(x, t, xi);
    if !value.is_finite() {
        return Err(Error::InvalidFamily(format!(
            "non-finite output at t = {t}, xi = {xi:?}"
        )));
    }
    Ok(value)
}
