use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Real eigenvalues in ascending order, optionally with eigenvectors as columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<ComplexMatrix>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn hermitian_eigendecomposition(a: &ComplexMatrix) -> Result<Spectrum> {
    let norm = a.frobenius_norm();
    let violation = a.hermitian_violation();
    let tolerance = 1e-10 * norm;
    if violation > tolerance {
        return Err(Error::NotHermitian {
            violation,
            tolerance,
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    let n = a.dim();
    // Symmetrize exactly so the solver sees a Hermitian matrix.
    let sym = (a + &a.adjoint()).scale_real(0.5);
    let eig = sym.to_nalgebra().symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
    })
}

/// Ascending eigenvalues of a real symmetric matrix given row-major.
pub fn symmetric_eigenvalues(dim: usize, data: &[f64]) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_row_slice(dim, dim, data);
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}
