use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::symmetry_residual;

/// Ascending eigenvalues with orthonormal real eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

/// Diagonalizes a real symmetric matrix.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive; ties go to the last such component.
pub fn eigensystem_real_symmetric(h: &DMatrix<f64>) -> Result<Eigensystem> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::invalid("eigensystem needs a non-empty square matrix"));
    }
    let scale = h.norm().max(1.0);
    let asym = symmetry_residual(h);
    if asym > 1e-10 * scale {
        return Err(Error::invalid(format!("matrix not symmetric (residual {asym:e})")));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let decomposition = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomposition.eigenvalues[a].total_cmp(&decomposition.eigenvalues[b]));

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = decomposition.eigenvalues[src];
        let mut v = decomposition.eigenvectors.column(src).into_owned();
        v /= v.norm();
        fix_sign(&mut v);
        vectors.set_column(dst, &v);
    }
    Ok(Eigensystem { values, vectors })
}

fn fix_sign(v: &mut DVector<f64>) {
    let max = v.amax();
    let pivot = v
        .iter()
        .rposition(|c| c.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
}
