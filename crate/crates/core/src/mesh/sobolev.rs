use nalgebra::DMatrixViewMut;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use super::Mesh;
use crate::model::dot;

/// The P1 stiffness matrix `K_ij = ∫ ∇φ_i·∇φ_j` on the unknowns, with its
/// Cholesky factor. `K⁻¹ g` is the H¹₀ representative of a discrete
/// differential `g`.
pub struct SobolevMetric {
    stiffness: CscMatrix<f64>,
    factor: CscCholesky<f64>,
}

impl SobolevMetric {
    pub(crate) fn assemble(mesh: &Mesh) -> Self {
        let n = mesh.unknowns();
        let nv = mesh.vertices_per_element();
        let mut coo = CooMatrix::new(n, n);
        for e in mesh.elements() {
            for a in 0..nv {
                let Some(i) = e.dofs[a] else { continue };
                for b in 0..nv {
                    let Some(j) = e.dofs[b] else { continue };
                    coo.push(i, j, e.measure * dot(e.grads[a], e.grads[b]));
                }
            }
        }
        let stiffness = CscMatrix::from(&coo);
        let factor = CscCholesky::factor(&stiffness).expect("P1 stiffness matrix is SPD");
        Self { stiffness, factor }
    }

    /// Solves `K w = g`.
    pub fn riesz(&self, g: &[f64]) -> Vec<f64> {
        let mut w = g.to_vec();
        self.factor
            .solve_mut(DMatrixViewMut::from_slice(&mut w, g.len(), 1));
        w
    }

    /// `aᵀ K b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (j, col) in self.stiffness.col_iter().enumerate() {
            let bj = b[j];
            for (&i, &v) in col.row_indices().iter().zip(col.values()) {
                acc += a[i] * v * bj;
            }
        }
        acc
    }
}
