//! Small dense symmetric eigendecomposition.

use crate::error::SolverError;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigen-decomposition `M = Q^T diag(d) Q` with eigenvalues sorted in
/// descending order; the rows of `Q` are orthonormal eigenvectors.
pub fn sym_eigendecomposition(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>), SolverError> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(SolverError::DimensionMismatch(format!("{}x{}", n, m.ncols())));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax() / scale;
    if asym > 1e-10 {
        return Err(SolverError::NotSymmetric(asym));
    }
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let d = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let q = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(c, order[r])]);
    Ok((q, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diag() {
        let (_, d) = sym_eigendecomposition(&DMatrix::identity(3, 3)).unwrap();
        assert!(d.iter().all(|v| (*v - 1.0).abs() < 1e-15));
        let (_, d) = sym_eigendecomposition(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 2.0]))).unwrap();
        assert_eq!(d.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn reconstruction() {
        let n = 10;
        let m = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 + ((j * 7 + i * 3) % 11) as f64);
        let (q, d) = sym_eigendecomposition(&m).unwrap();
        let r = q.transpose() * DMatrix::from_diagonal(&d) * &q;
        assert!((r - &m).norm() <= 1e-10 * m.norm());
        for k in 1..n {
            assert!(d[k - 1] >= d[k]);
        }
    }

    #[test]
    fn nonsymmetric_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eigendecomposition(&m), Err(SolverError::NotSymmetric(_))));
    }
}
