//! Problem instances: domain, exponents, parameter λ and the Lagrangian family.

mod family;
mod hypotheses;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use family::{evaluate_lagrangian, Lagrangian, LagrangianFamily, LagrangianValue, Vec2};
pub(crate) use family::{dot, norm};
pub use hypotheses::{
    check_hypotheses, Hypothesis, HypothesisReport, SamplingPlan, Violation, Witness,
};

/// The exponents `1 < q < p < s < p*` of the concave-convex right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64, s: f64) -> Self {
        Self { p, q, s }
    }

    /// Checks `1 < q < p < s < p*` for dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let Exponents { p, q, s } = *self;
        if ![p, q, s].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidProblem("exponents must be finite".into()));
        }
        if !(1.0 < q && q < p && p < s) {
            return Err(Error::InvalidProblem(format!(
                "exponents must satisfy 1 < q < p < s, got q = {q}, p = {p}, s = {s}"
            )));
        }
        let crit = critical_exponent(dim, p);
        if s >= crit {
            return Err(Error::InvalidProblem(format!(
                "s = {s} must be below the critical exponent p* = {crit}"
            )));
        }
        Ok(())
    }
}

/// Sobolev critical exponent `p* = Np/(N-p)` if `N > p`, else +∞.
pub fn critical_exponent(dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    if n > p {
        n * p / (n - p)
    } else {
        f64::INFINITY
    }
}

/// Source of the embedding constants `c_q`, `c_s` feeding the h-curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EmbeddingMode {
    #[default]
    DiscreteEstimated,
    UserSupplied { c_q: f64, c_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    /// Cells per axis.
    pub n: usize,
    pub exponents: Exponents,
    pub lambda: f64,
    pub family: LagrangianFamily,
    pub embedding: EmbeddingMode,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if self.n < 2 {
            return Err(Error::MeshTooCoarse(self.n));
        }
        self.exponents.validate(self.dim)?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "lambda = {} must be finite and > 0",
                self.lambda
            )));
        }
        self.family.validate()?;
        if self.family.p() != self.exponents.p {
            return Err(Error::InvalidProblem(format!(
                "family exponent {} differs from p = {}",
                self.family.p(),
                self.exponents.p
            )));
        }
        if let EmbeddingMode::UserSupplied { c_q, c_s } = self.embedding {
            if !(c_q > 0.0 && c_s > 0.0 && c_q.is_finite() && c_s.is_finite()) {
                return Err(Error::InvalidProblem(
                    "user-supplied embedding constants must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, q: f64, s: f64) -> ProblemSpec {
        ProblemSpec {
            dim: 1,
            n: 16,
            exponents: Exponents::new(p, q, s),
            lambda: 0.1,
            family: LagrangianFamily::PLaplacian { p },
            embedding: EmbeddingMode::DiscreteEstimated,
        }
    }

    #[test]
    fn exponent_ordering() {
        assert!(spec(2.0, 1.5, 4.0).validate().is_ok());
        assert!(spec(2.0, 2.0, 4.0).validate().is_err());
        assert!(spec(2.0, 2.5, 4.0).validate().is_err());
        assert!(spec(2.0, 1.5, 2.0).validate().is_err());
        assert!(spec(2.0, 0.9, 4.0).validate().is_err());
    }

    #[test]
    fn critical_exponent_in_2d() {
        assert_eq!(critical_exponent(2, 1.5), 6.0);
        assert!(critical_exponent(2, 2.0).is_infinite());
        assert!(critical_exponent(1, 1.2).is_infinite());
        let mut s = spec(1.5, 1.2, 7.0);
        s.dim = 2;
        assert!(s.validate().is_err());
        s.exponents.s = 5.0;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn lambda_and_mesh_checks() {
        let mut s = spec(2.0, 1.5, 4.0);
        s.lambda = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec(2.0, 1.5, 4.0);
        s.n = 1;
        assert_eq!(s.validate(), Err(Error::MeshTooCoarse(1)));
        let mut s = spec(2.0, 1.5, 4.0);
        s.dim = 3;
        assert_eq!(s.validate(), Err(Error::UnsupportedDimension(3)));
        let mut s = spec(2.0, 1.5, 4.0);
        s.family = LagrangianFamily::PLaplacian { p: 3.0 };
        assert!(s.validate().is_err());
    }
}
