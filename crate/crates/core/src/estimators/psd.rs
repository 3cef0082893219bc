use nalgebra::{DMatrix, SymmetricEigen};

use super::{is_symmetric, SYMMETRY_TOL};
use crate::error::{input_err, Result};

/// Projects a symmetric matrix onto the PSD cone by clipping negative
/// eigenvalues to zero. PSD inputs are returned unchanged.
pub fn psd_project(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !is_symmetric(matrix, SYMMETRY_TOL) {
        return input_err("psd_project requires a symmetric matrix");
    }
    let eig = SymmetricEigen::new(matrix.clone());
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return Ok(matrix.clone());
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}
