//! Uniform P1 meshes of (0,1) and (0,1)², discrete functions with zero
//! boundary trace, and their Lebesgue norms and W^{1,p} seminorm.

mod embedding;
mod sobolev;

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::model::{norm, Vec2};

pub use embedding::{estimate_embedding_constant, EmbeddingEstimate, EmbeddingOptions};
pub use sobolev::SobolevMetric;

/// A segment (1D) or triangle (2D) with its constant basis gradients.
#[derive(Debug, Clone)]
pub struct Element {
    /// Global node indices; only the first `dim + 1` entries are meaningful.
    pub nodes: [usize; 3],
    /// Unknown index of each vertex, `None` on the boundary.
    pub dofs: [Option<usize>; 3],
    pub measure: f64,
    pub grads: [Vec2; 3],
    pub barycenter: Vec2,
}

pub struct Mesh {
    dim: usize,
    n: usize,
    h_size: f64,
    coords: Vec<Vec2>,
    elements: Vec<Element>,
    interior: Vec<usize>,
    node_dof: Vec<Option<usize>>,
    lumped_mass: Vec<f64>,
    sobolev: OnceLock<SobolevMetric>,
}

impl fmt::Debug for Mesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mesh")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("elements", &self.elements.len())
            .field("unknowns", &self.interior.len())
            .finish()
    }
}

/// Builds the uniform mesh with `n` cells per axis.
///
/// In 2D every square cell is split along its (0,0)–(1,1) diagonal into two
/// right triangles.
pub fn build_mesh(dim: usize, n: usize) -> Result<Arc<Mesh>> {
    if n < 2 {
        return Err(Error::MeshTooCoarse(n));
    }
    let h = 1.0 / n as f64;
    let (coords, raw): (Vec<Vec2>, Vec<Vec<usize>>) = match dim {
        1 => (
            (0..=n).map(|i| [i as f64 * h, 0.0]).collect(),
            (0..n).map(|i| vec![i, i + 1]).collect(),
        ),
        2 => {
            let idx = |i: usize, j: usize| j * (n + 1) + i;
            let mut coords = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    coords.push([i as f64 * h, j as f64 * h]);
                }
            }
            let mut tris = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                    tris.push(vec![a, b, c]);
                    tris.push(vec![a, c, d]);
                }
            }
            (coords, tris)
        }
        d => return Err(Error::UnsupportedDimension(d)),
    };

    let on_boundary = |x: Vec2| -> bool {
        let tol = 0.25 * h;
        let edge = |v: f64| v < tol || v > 1.0 - tol;
        if dim == 1 {
            edge(x[0])
        } else {
            edge(x[0]) || edge(x[1])
        }
    };
    let mut node_dof = vec![None; coords.len()];
    let mut interior = Vec::new();
    for (k, &x) in coords.iter().enumerate() {
        if !on_boundary(x) {
            node_dof[k] = Some(interior.len());
            interior.push(k);
        }
    }

    let mut elements = Vec::with_capacity(raw.len());
    let mut lumped_mass = vec![0.0; interior.len()];
    for verts in raw {
        let mut nodes = [0usize; 3];
        let mut dofs = [None; 3];
        for (slot, &v) in verts.iter().enumerate() {
            nodes[slot] = v;
            dofs[slot] = node_dof[v];
        }
        let (measure, grads) = if dim == 1 {
            (h, [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]])
        } else {
            let (p0, p1, p2) = (coords[nodes[0]], coords[nodes[1]], coords[nodes[2]]);
            let area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            let g = |a: Vec2, b: Vec2| [(a[1] - b[1]) / area2, (b[0] - a[0]) / area2];
            (0.5 * area2.abs(), [g(p1, p2), g(p2, p0), g(p0, p1)])
        };
        let nv = dim + 1;
        let mut barycenter = [0.0, 0.0];
        for &v in &nodes[..nv] {
            barycenter[0] += coords[v][0] / nv as f64;
            barycenter[1] += coords[v][1] / nv as f64;
        }
        for d in dofs[..nv].iter().flatten() {
            lumped_mass[*d] += measure / nv as f64;
        }
        elements.push(Element {
            nodes,
            dofs,
            measure,
            grads,
            barycenter,
        });
    }

    Ok(Arc::new(Mesh {
        dim,
        n,
        h_size: h,
        coords,
        elements,
        interior,
        node_dof,
        lumped_mass,
        sobolev: OnceLock::new(),
    }))
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h_size(&self) -> f64 {
        self.h_size
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn unknowns(&self) -> usize {
        self.interior.len()
    }

    /// Coordinates of every node, boundary included.
    pub fn coords(&self) -> &[Vec2] {
        &self.coords
    }

    /// Global node index of each unknown.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn node_dof(&self, node: usize) -> Option<usize> {
        self.node_dof[node]
    }

    /// Coordinates of the unknowns, in unknown order.
    pub fn interior_coords(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.interior.iter().map(|&k| self.coords[k])
    }

    /// Integral of each interior hat function (the vertex-rule weights).
    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped_mass
    }

    pub fn vertices_per_element(&self) -> usize {
        self.dim + 1
    }

    /// H¹₀ Riesz map, assembled and factored on first use.
    pub fn sobolev(&self) -> &SobolevMetric {
        self.sobolev.get_or_init(|| SobolevMetric::assemble(self))
    }

    /// Constant gradient of the P1 function with unknown values `u` on `e`.
    #[inline]
    pub fn element_gradient(&self, e: &Element, u: &[f64]) -> Vec2 {
        let mut g = [0.0, 0.0];
        for k in 0..=self.dim {
            if let Some(d) = e.dofs[k] {
                g[0] += u[d] * e.grads[k][0];
                g[1] += u[d] * e.grads[k][1];
            }
        }
        g
    }

    /// Mean of the vertex values of `u` on `e`.
    #[inline]
    pub fn element_mean(&self, e: &Element, u: &[f64]) -> f64 {
        let nv = self.dim + 1;
        e.dofs[..nv].iter().flatten().map(|&d| u[d]).sum::<f64>() / nv as f64
    }
}

/// Nodal values of a P1 function on the unknowns of `mesh`; boundary values are 0.
#[derive(Clone)]
pub struct DiscreteFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl fmt::Debug for DiscreteFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteFunction")
            .field("mesh", &self.mesh)
            .field("values", &self.values)
            .finish()
    }
}

impl DiscreteFunction {
    pub fn zeros(mesh: &Arc<Mesh>) -> Self {
        Self {
            mesh: Arc::clone(mesh),
            values: vec![0.0; mesh.unknowns()],
        }
    }

    pub fn from_values(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.unknowns() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    /// Nodal interpolant of `f` (boundary values of `f` are ignored).
    pub fn interpolate(mesh: &Arc<Mesh>, f: impl Fn(Vec2) -> f64) -> Self {
        Self {
            mesh: Arc::clone(mesh),
            values: mesh.interior_coords().map(f).collect(),
        }
    }

    /// Interpolant of the first Dirichlet eigenfunction shape, scaled to unit sup-norm.
    pub fn ground_state(mesh: &Arc<Mesh>) -> Self {
        use std::f64::consts::PI;
        let dim = mesh.dim();
        Self::interpolate(mesh, |x| {
            if dim == 1 {
                (PI * x[0]).sin()
            } else {
                (PI * x[0]).sin() * (PI * x[1]).sin()
            }
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_mesh(&self, other: &DiscreteFunction) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &DiscreteFunction) -> Self {
        debug_assert!(self.same_mesh(other));
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn norm_lp(&self, ell: f64) -> f64 {
        norm_lp(self, ell)
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn seminorm_w1p(&self, p: f64) -> f64 {
        seminorm_w1p(self, p)
    }
}

/// Vertex-rule quadrature of `|u|^ell`: `Σ m_i |u_i|^ell`.
pub(crate) fn power_integral(mesh: &Mesh, u: &[f64], ell: f64) -> f64 {
    mesh.lumped_mass()
        .iter()
        .zip(u)
        .map(|(m, v)| m * v.abs().powf(ell))
        .sum()
}

/// `Σ_e |∇u_e|^p |e|`.
pub(crate) fn gradient_power_integral(mesh: &Mesh, u: &[f64], p: f64) -> f64 {
    mesh.elements()
        .iter()
        .map(|e| norm(mesh.element_gradient(e, u)).powf(p) * e.measure)
        .sum()
}

/// `|u|_ell` by composite vertex-rule quadrature.
pub fn norm_lp(u: &DiscreteFunction, ell: f64) -> f64 {
    power_integral(&u.mesh, &u.values, ell).powf(1.0 / ell)
}

/// `‖u‖_p = |∇u|_p` with element-constant gradients.
pub fn seminorm_w1p(u: &DiscreteFunction, p: f64) -> f64 {
    gradient_power_integral(&u.mesh, &u.values, p).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn counts() {
        let m = build_mesh(1, 4).unwrap();
        assert_eq!(m.elements().len(), 4);
        assert_eq!(m.unknowns(), 3);
        let m = build_mesh(2, 2).unwrap();
        assert_eq!(m.elements().len(), 8);
        assert_eq!(m.unknowns(), 1);
        let m = build_mesh(1, 128).unwrap();
        assert_eq!(m.unknowns(), 127);
        let m = build_mesh(2, 8).unwrap();
        assert_eq!(m.unknowns(), 49);
        assert!(matches!(build_mesh(1, 1), Err(Error::MeshTooCoarse(1))));
        assert!(matches!(build_mesh(3, 4), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn element_measures_and_mass() {
        for (dim, n) in [(1, 7), (2, 5)] {
            let m = build_mesh(dim, n).unwrap();
            let h = 1.0 / n as f64;
            let expect = if dim == 1 { h } else { 0.5 * h * h };
            for e in m.elements() {
                assert_relative_eq!(e.measure, expect, max_relative = 1e-12);
                // basis gradients sum to zero on each element
                let nv = dim + 1;
                let sx: f64 = e.grads[..nv].iter().map(|g| g[0]).sum();
                let sy: f64 = e.grads[..nv].iter().map(|g| g[1]).sum();
                assert!(sx.abs() < 1e-9 && sy.abs() < 1e-9);
            }
            let total: f64 = m.elements().iter().map(|e| e.measure).sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
            // interior hat functions all have mass h^dim on the uniform mesh
            for &w in m.lumped_mass() {
                assert_relative_eq!(w, h.powi(dim as i32), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn single_hat_norms() {
        let m = build_mesh(1, 2).unwrap();
        let u = DiscreteFunction::from_values(&m, vec![1.0]).unwrap();
        assert_relative_eq!(u.norm_lp(1.0), 0.5);
        assert_relative_eq!(u.seminorm_w1p(2.0), 2.0, max_relative = 1e-14);
        let z = DiscreteFunction::zeros(&m);
        assert_eq!(z.norm_lp(2.0), 0.0);
        assert_eq!(z.seminorm_w1p(2.0), 0.0);
    }

    #[test]
    fn sine_interpolant_norms() {
        let m = build_mesh(1, 64).unwrap();
        let u = DiscreteFunction::interpolate(&m, |x| (PI * x[0]).sin());
        assert!((u.norm_lp(2.0) - 0.5f64.sqrt()).abs() < 1e-3);
        assert!((u.seminorm_w1p(2.0) - PI / 2f64.sqrt()).abs() < 1e-2);
    }

    #[test]
    fn gradient_on_2d_linear_function() {
        // u = x on interior nodes; on interior elements the gradient is (1, 0)
        let m = build_mesh(2, 6).unwrap();
        let u = DiscreteFunction::interpolate(&m, |x| x[0]);
        for e in m.elements() {
            if e.dofs.iter().all(|d| d.is_some()) {
                let g = m.element_gradient(e, u.values());
                assert_relative_eq!(g[0], 1.0, max_relative = 1e-12);
                assert!(g[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let m = build_mesh(1, 4).unwrap();
        assert!(DiscreteFunction::from_values(&m, vec![1.0; 4]).is_err());
    }
}
