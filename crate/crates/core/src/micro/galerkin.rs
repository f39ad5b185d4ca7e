//! Reduced Galerkin/DAE solver used as an independent check of the
//! monolithic stepper on small layers.
//!
//! The discrete divergence-free space is spanned by the null space of the
//! divergence matrix. On it the basis is orthonormal for
//! `(a, b)_H = eps ∫_f D(a):D(b) + (1/eps) ∫_s A D(a):D(b)`, so the fluid and
//! solid Gram matrices satisfy `B + C = I`. With `B = Q^T D Q` the evolution
//! `B α' + C α = Φ^T F` decouples into scalar equations
//! `D_i α*_i' + (1 - D_i) α*_i = h*_i` with `h* = Q Φ^T F`; modes with
//! `D_i = 0` are algebraic, `α*_i = h*_i`.
//!
//! Everything here is dense and meant for layers with a few hundred DOFs.

use super::{MicroForcing, MicroSystem};
use crate::error::{CheckError, Error, SolverError};
use crate::fem::{sym_eigendecomposition, CsrMatrix};
use nalgebra::{DMatrix, DVector};

/// Relative threshold separating differential from algebraic modes.
pub const RANK_TOL: f64 = 1e-12;
/// Relative eigenvalue threshold defining the divergence null space.
const NULL_TOL: f64 = 1e-10;

/// Dense reduced system.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    /// Dimension of the discrete divergence-free space.
    pub dimension: usize,
    /// Basis vectors as columns (`n_velocity x m`), ordered by increasing
    /// `H`-energy relative to the `L^2` mass.
    pub phi: DMatrix<f64>,
    /// Fluid Gram matrix.
    pub b: DMatrix<f64>,
    /// Solid Gram matrix.
    pub c: DMatrix<f64>,
    /// Rows are eigenvectors of `b`.
    pub q: DMatrix<f64>,
    /// Eigenvalues of `b`, descending.
    pub d: DVector<f64>,
    /// Number of differential modes (`D_i > RANK_TOL max D`).
    pub rank: usize,
    /// `max |Φ^T H Φ - I|`.
    pub orthonormality_defect: f64,
    /// `max |B + C - I|`.
    pub identity_defect: f64,
}

fn dense(m: &CsrMatrix) -> DMatrix<f64> {
    m.to_dense()
}

fn max_abs_minus_identity(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::<f64>::identity(n, n)).amax()
}

/// Builds the reduced system with the first `m` basis vectors (all if `None`).
pub fn galerkin_reduce(sys: &MicroSystem, m: Option<usize>) -> Result<GalerkinSystem, Error> {
    let nv = sys.velocity.n_dofs();
    let eps = sys.epsilon;
    // Null space of the divergence.
    let z = if sys.pressure.n_dofs() == 0 {
        DMatrix::<f64>::identity(nv, nv)
    } else {
        let div = dense(&sys.div);
        let (qd, dd) = sym_eigendecomposition(&(div.transpose() * &div))?;
        let cut = NULL_TOL * dd.amax().max(f64::MIN_POSITIVE);
        let rows: Vec<usize> = (0..nv).filter(|&k| dd[k] <= cut).collect();
        DMatrix::from_fn(nv, rows.len(), |i, j| qd[(rows[j], i)])
    };
    let dimension = z.ncols();
    let m = m.unwrap_or(dimension);
    if m > dimension || m == 0 {
        return Err(CheckError::BasisDeficient { requested: m, available: dimension }.into());
    }
    let kf = dense(&sys.k_f) * eps;
    let ks = dense(&sys.k_s) / eps;
    let h = &kf + &ks;
    let mass = dense(&sys.mass_f) + dense(&sys.mass_s);
    let hz = z.transpose() * &h * &z;
    let mz = z.transpose() * &mass * &z;
    let chol = mz
        .cholesky()
        .ok_or_else(|| SolverError::SingularSystem("mass matrix on the divergence-free space".into()))?;
    let l_inv = chol.l().try_inverse().ok_or_else(|| SolverError::SingularSystem("mass factor".into()))?;
    let s = &l_inv * hz * l_inv.transpose();
    let (qs, ds) = sym_eigendecomposition(&s)?;
    // Smallest eigenvalues first; y_k = L^-T v_k has y^T Hz y = lambda_k.
    let mut phi = DMatrix::<f64>::zeros(nv, m);
    for j in 0..m {
        let k = dimension - 1 - j;
        let lambda = ds[k];
        if !(lambda > 0.0) {
            return Err(SolverError::IndefiniteDetected(lambda).into());
        }
        let v = qs.row(k).transpose();
        let y = l_inv.transpose() * v;
        let col = (&z * y) / lambda.sqrt();
        phi.set_column(j, &col);
    }
    // Normalize once more against round-off.
    for j in 0..m {
        let col = phi.column(j).clone_owned();
        let n = (col.transpose() * &h * &col)[(0, 0)].sqrt();
        phi.set_column(j, &(col / n));
    }
    let b = phi.transpose() * &kf * &phi;
    let c = phi.transpose() * &ks * &phi;
    let b = 0.5 * (&b + b.transpose());
    let c = 0.5 * (&c + c.transpose());
    let gram = &b + &c;
    let orthonormality_defect = max_abs_minus_identity(&(phi.transpose() * &h * &phi));
    let identity_defect = max_abs_minus_identity(&gram);
    let (q, d) = sym_eigendecomposition(&b)?;
    let cut = RANK_TOL * d.amax();
    let rank = d.iter().filter(|v| **v > cut).count();
    Ok(GalerkinSystem { dimension, phi, b, c, q, d, rank, orthonormality_defect, identity_defect })
}

impl GalerkinSystem {
    /// Reduced forcing `h*(t) = Q Φ^T F(t)`.
    pub fn reduced_forcing(&self, sys: &MicroSystem, forcing: &MicroForcing, t: f64) -> DVector<f64> {
        let f = DVector::from_vec(sys.load(forcing, t));
        &self.q * (self.phi.transpose() * f)
    }

    /// Whether mode `i` is differential.
    pub fn is_differential(&self, i: usize) -> bool {
        i < self.rank
    }
}

/// Integrates the decoupled system by backward Euler; returns `α` at
/// `t = 0, dt, ..., n dt`.
pub fn dae_solve(
    gs: &GalerkinSystem,
    sys: &MicroSystem,
    forcing: &MicroForcing,
    t_end: f64,
) -> Result<Vec<DVector<f64>>, Error> {
    let dt = sys.dt;
    let n_steps = (t_end / dt).round() as usize;
    let h0 = gs.reduced_forcing(sys, forcing, 0.0);
    if h0.amax() > 1e-9 {
        return Err(CheckError::CompatibilityViolated(h0.amax()).into());
    }
    let m = gs.d.len();
    let mut star = DVector::<f64>::zeros(m);
    let mut out = vec![DVector::<f64>::zeros(m)];
    for k in 1..=n_steps {
        let h = gs.reduced_forcing(sys, forcing, k as f64 * dt);
        for i in 0..m {
            star[i] = if gs.is_differential(i) {
                let d = gs.d[i];
                (d / dt * star[i] + h[i]) / (d / dt + 1.0 - d)
            } else {
                h[i]
            };
        }
        out.push(gs.q.transpose() * &star);
    }
    Ok(out)
}

/// Discrepancy between the reduced and the monolithic solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DaeComparison {
    pub dimension: usize,
    pub m: usize,
    pub rank: usize,
    /// Relative `L^2(0,T;L^2)` difference of the solid displacement.
    pub rel_u: f64,
    /// Relative `L^2(0,T;L^2)` difference of the fluid velocity.
    pub rel_v: f64,
    pub identity_defect: f64,
    pub orthonormality_defect: f64,
    pub eig_min: f64,
    pub eig_max: f64,
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Runs both solvers over `t_end` and compares them.
pub fn compare_dae_vs_monolithic(
    sys: &MicroSystem,
    forcing: &MicroForcing,
    t_end: f64,
    m: Option<usize>,
) -> Result<DaeComparison, Error> {
    let gs = galerkin_reduce(sys, m)?;
    let alpha = dae_solve(&gs, sys, forcing, t_end)?;
    let (_, states) = sys.run_trajectory(forcing, t_end)?;
    let dt = sys.dt;
    let to_vec = |a: &DVector<f64>| (&gs.phi * a).as_slice().to_vec();
    let mut prev = vec![0.0; sys.velocity.n_dofs()];
    let (mut du, mut nu, mut dv, mut nv) = (0.0, 0.0, 0.0, 0.0);
    for (a, s) in alpha.iter().zip(&states).skip(1) {
        let u = to_vec(a);
        let w: Vec<f64> = u.iter().zip(&prev).map(|(x, y)| (x - y) / dt).collect();
        let eu: Vec<f64> = u.iter().zip(&s.u).map(|(x, y)| x - y).collect();
        let ev: Vec<f64> = w.iter().zip(&s.w).map(|(x, y)| x - y).collect();
        du += dt * sys.mass_s.bilinear(&eu, &eu);
        nu += dt * sys.mass_s.bilinear(&s.u, &s.u);
        dv += dt * sys.mass_f.bilinear(&ev, &ev);
        nv += dt * sys.mass_f.bilinear(&s.w, &s.w);
        prev = u;
    }
    Ok(DaeComparison {
        dimension: gs.dimension,
        m: gs.d.len(),
        rank: gs.rank,
        rel_u: relative(du, nu),
        rel_v: relative(dv, nv),
        identity_defect: gs.identity_defect,
        orthonormality_defect: gs.orthonormality_defect,
        eig_min: gs.d.min(),
        eig_max: gs.d.max(),
    })
}
