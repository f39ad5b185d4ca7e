//! Linear solvers: Jacobi-preconditioned conjugate gradients for symmetric
//! positive definite systems and sparse LU for saddle-point systems.

use super::sparse::CsrMatrix;
use crate::error::SolverError;
use faer::sparse::linalg::solvers::Lu;
use faer::linalg::solvers::SolveCore;
use faer::Mat;

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative residual `|A x - b| / |b|` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm(b);
    if nb > 0.0 {
        norm(&r) / nb
    } else {
        norm(&r)
    }
}

/// Solves a symmetric positive definite system with diagonally
/// preconditioned conjugate gradients (iteration cap `10 n`).
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>, SolverError> {
    let n = a.nrows;
    if a.ncols != n || b.len() != n {
        return Err(SolverError::DimensionMismatch(format!("{}x{} vs {}", a.nrows, a.ncols, b.len())));
    }
    let nb = norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok(x);
    }
    let diag = a.diagonal();
    if let Some(d) = diag.iter().find(|d| !(**d > 0.0)) {
        return Err(SolverError::IndefiniteDetected(*d));
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let cap = 10 * n.max(1);
    for it in 0..cap {
        a.matvec_into(&p, &mut ap);
        let curv = dot(&p, &ap);
        if !(curv > 0.0) {
            return Err(SolverError::IndefiniteDetected(curv / dot(&p, &p).max(f64::MIN_POSITIVE)));
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / nb;
        if res <= tol {
            // Confirm with the true residual.
            let true_res = relative_residual(a, &x, b);
            if true_res <= tol * 10.0 {
                return Ok(x);
            }
        }
        if !res.is_finite() {
            return Err(SolverError::NotConverged { iterations: it + 1, residual: res });
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::NotConverged { iterations: cap, residual: relative_residual(a, &x, b) })
}

/// Sparse LU factorization reusable for many right-hand sides.
pub struct DirectSolver {
    matrix: CsrMatrix,
    lu: Lu<usize, f64>,
    pub(crate) tol: f64,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver").field("n", &self.matrix.nrows).field("tol", &self.tol).finish()
    }
}

impl DirectSolver {
    pub fn factor(a: &CsrMatrix, tol: f64) -> Result<Self, SolverError> {
        if a.nrows != a.ncols {
            return Err(SolverError::DimensionMismatch(format!("{}x{}", a.nrows, a.ncols)));
        }
        let m = a.to_faer().map_err(SolverError::SingularSystem)?;
        let lu = m.sp_lu().map_err(|e| SolverError::SingularSystem(format!("{e:?}")))?;
        Ok(Self { matrix: a.clone(), lu, tol })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::zeros(b.len(), 1);
        for (i, v) in b.iter().enumerate() {
            rhs[(i, 0)] = *v;
        }
        self.lu.solve_in_place_with_conj(faer::Conj::No, rhs.as_mut());
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solves `A x = b` with up to three steps of iterative refinement;
    /// fails if the relative residual stays above the tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        if b.len() != self.n() {
            return Err(SolverError::DimensionMismatch(format!("{} vs {}", self.n(), b.len())));
        }
        if b.iter().all(|v| *v == 0.0) {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.raw_solve(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::SingularSystem("factorization produced non-finite values".into()));
        }
        let mut res = relative_residual(&self.matrix, &x, b);
        for _ in 0..3 {
            if res <= self.tol * 1e-2 {
                break;
            }
            let ax = self.matrix.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.raw_solve(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let cres = relative_residual(&self.matrix, &cand, b);
            if cres < res {
                x = cand;
                res = cres;
            } else {
                break;
            }
        }
        if res > self.tol {
            return Err(SolverError::NotConverged { iterations: 0, residual: res });
        }
        Ok(x)
    }
}

/// One-shot solve of a (possibly indefinite) saddle-point system.
pub fn solve_saddle(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>, SolverError> {
    DirectSolver::factor(a, tol)?.solve(b)
}
