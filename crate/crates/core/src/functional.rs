//! Discrete energies `𝒥`, `𝒥₊`, `𝒥₋` and the truncated functional `F`,
//! with gradients that are the exact derivatives of the quadratures.
//!
//! The `A`-term uses the element mean of `u` (barycentric value) and the
//! constant element gradient; the power terms use the vertex rule
//! `Σ m_i G(u_i)` with the lumped masses `m_i`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{gradient_power_integral, DiscreteFunction, Mesh};
use crate::model::{dot, norm, Lagrangian, LagrangianFamily, ProblemSpec};
use crate::truncation::TruncationProfile;

/// Which part of `u` feeds the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRestriction {
    /// `λ|u|^{q−2}u + |u|^{s−2}u`.
    Full,
    /// `λu₊^{q−1} + u₊^{s−1}`.
    Plus,
    /// The mirrored negative-part version.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyVariant {
    pub sign: SignRestriction,
    pub truncation: Option<TruncationProfile>,
}

impl EnergyVariant {
    pub const FULL: Self = Self::signed(SignRestriction::Full);
    pub const PLUS: Self = Self::signed(SignRestriction::Plus);
    pub const MINUS: Self = Self::signed(SignRestriction::Minus);

    pub const fn signed(sign: SignRestriction) -> Self {
        Self {
            sign,
            truncation: None,
        }
    }

    pub fn truncated(tp: TruncationProfile) -> Self {
        Self::FULL.with_truncation(tp)
    }

    pub fn with_truncation(self, tp: TruncationProfile) -> Self {
        Self {
            truncation: Some(tp),
            ..self
        }
    }

    pub fn untruncated(self) -> Self {
        Self {
            truncation: None,
            ..self
        }
    }
}

/// Discrete differential: entry i is `⟨d𝒥(u), φ_i⟩`.
pub type GradientVector = Vec<f64>;

/// `|v|^e sgn(v)`, with value 0 at `v = 0`.
#[inline]
pub(crate) fn signed_pow(v: f64, e: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.abs().powf(e).copysign(v)
    }
}

/// Primitive `G(t)` (without the 1/ℓ factor) and derivative `G'(t)/ℓ`.
#[inline]
fn power_term(sign: SignRestriction, v: f64, ell: f64) -> (f64, f64) {
    match sign {
        SignRestriction::Full => (v.abs().powf(ell), signed_pow(v, ell - 1.0)),
        SignRestriction::Plus if v > 0.0 => (v.powf(ell), v.powf(ell - 1.0)),
        SignRestriction::Minus if v < 0.0 => ((-v).powf(ell), -(-v).powf(ell - 1.0)),
        _ => (0.0, 0.0),
    }
}

/// Adds `∂/∂u_i (1/p) Σ_e |e| |∇u_e|^p` into `out`.
pub(crate) fn assemble_gradient_power(mesh: &Mesh, u: &[f64], p: f64, out: &mut [f64]) {
    let nv = mesh.vertices_per_element();
    for e in mesh.elements() {
        let g = mesh.element_gradient(e, u);
        let r = norm(g);
        if r == 0.0 {
            continue;
        }
        let w = e.measure * r.powf(p - 2.0);
        for k in 0..nv {
            if let Some(d) = e.dofs[k] {
                out[d] += w * dot(g, e.grads[k]);
            }
        }
    }
}

/// Energy evaluator bound to a problem and its mesh.
#[derive(Debug, Clone)]
pub struct Functional {
    family: LagrangianFamily,
    lambda: f64,
    q: f64,
    s: f64,
    p: f64,
    mesh: Arc<Mesh>,
}

impl Functional {
    pub fn new(spec: &ProblemSpec, mesh: &Arc<Mesh>) -> Result<Self> {
        spec.validate()?;
        if mesh.dim() != spec.dim || mesh.n() != spec.n {
            return Err(Error::MeshMismatch);
        }
        Ok(Self {
            family: spec.family,
            lambda: spec.lambda,
            p: spec.exponents.p,
            q: spec.exponents.q,
            s: spec.exponents.s,
            mesh: Arc::clone(mesh),
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Energy, and the gradient into `grad` when given.
    pub fn evaluate(&self, u: &[f64], variant: &EnergyVariant, mut grad: Option<&mut [f64]>) -> f64 {
        let mesh = &*self.mesh;
        debug_assert_eq!(u.len(), mesh.unknowns());
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }

        // ∫ A(x, u, ∇u)
        let nv = mesh.vertices_per_element();
        let uses_t = self.family.depends_on_t();
        let mut a_term = 0.0;
        for e in mesh.elements() {
            let xi = mesh.element_gradient(e, u);
            let t = if uses_t { mesh.element_mean(e, u) } else { 0.0 };
            let val = self.family.eval(e.barycenter, t, xi);
            a_term += e.measure * val.density;
            if let Some(g) = grad.as_deref_mut() {
                for k in 0..nv {
                    if let Some(d) = e.dofs[k] {
                        g[d] += e.measure * (dot(val.flux, e.grads[k]) + val.dt / nv as f64);
                    }
                }
            }
        }

        // Vertex-rule power terms.
        let mut q_int = 0.0;
        let mut s_int = 0.0;
        for (i, (&m, &v)) in mesh.lumped_mass().iter().zip(u).enumerate() {
            let (gq, dq) = power_term(variant.sign, v, self.q);
            let (gs, _) = power_term(variant.sign, v, self.s);
            q_int += m * gq;
            s_int += m * gs;
            if let Some(g) = grad.as_deref_mut() {
                g[i] -= self.lambda * m * dq;
            }
        }

        let (cut, cut_prime, rho) = match &variant.truncation {
            None => (1.0, 0.0, 0.0),
            Some(tp) => {
                let rho = gradient_power_integral(mesh, u, self.p).powf(1.0 / self.p);
                (tp.tau(rho), tp.tau_prime(rho), rho)
            }
        };

        if let Some(g) = grad {
            if cut != 0.0 {
                for (i, (&m, &v)) in mesh.lumped_mass().iter().zip(u).enumerate() {
                    let (_, ds) = power_term(variant.sign, v, self.s);
                    g[i] -= cut * m * ds;
                }
            }
            if cut_prime != 0.0 {
                // −(1/s) S τ'(ρ) ∂ρ/∂u_i with ∂ρ/∂u_i = ρ^{1−p} ∂/∂u_i[(1/p)Σ|e||∇u|^p].
                let r0 = variant.truncation.map(|tp| tp.r0).unwrap_or(0.0);
                assert!(rho >= r0 && rho > 0.0, "cutoff derivative active below R0");
                let mut dpow = vec![0.0; u.len()];
                assemble_gradient_power(mesh, u, self.p, &mut dpow);
                let scale = -s_int / self.s * cut_prime * rho.powf(1.0 - self.p);
                for (gi, di) in g.iter_mut().zip(&dpow) {
                    *gi += scale * di;
                }
            }
        }

        a_term - self.lambda / self.q * q_int - cut / self.s * s_int
    }

    pub fn energy(&self, u: &[f64], variant: &EnergyVariant) -> f64 {
        self.evaluate(u, variant, None)
    }

    pub fn gradient(&self, u: &[f64], variant: &EnergyVariant) -> GradientVector {
        let mut g = vec![0.0; u.len()];
        self.evaluate(u, variant, Some(&mut g));
        g
    }

    /// Max-norm of the gradient with each entry divided by its hat-function mass.
    pub fn residual_of_gradient(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(self.mesh.lumped_mass())
            .fold(0.0, |acc, (gi, m)| acc.max((gi / m).abs()))
    }

    pub fn residual(&self, u: &[f64], variant: &EnergyVariant) -> f64 {
        self.residual_of_gradient(&self.gradient(u, variant))
    }
}

fn bind(spec: &ProblemSpec, u: &DiscreteFunction) -> Result<Functional> {
    Functional::new(spec, u.mesh())
}

pub fn energy(spec: &ProblemSpec, u: &DiscreteFunction, variant: &EnergyVariant) -> Result<f64> {
    Ok(bind(spec, u)?.energy(u.values(), variant))
}

pub fn gradient(
    spec: &ProblemSpec,
    u: &DiscreteFunction,
    variant: &EnergyVariant,
) -> Result<GradientVector> {
    Ok(bind(spec, u)?.gradient(u.values(), variant))
}

pub fn residual_norm(spec: &ProblemSpec, u: &DiscreteFunction, variant: &EnergyVariant) -> Result<f64> {
    Ok(bind(spec, u)?.residual(u.values(), variant))
}
