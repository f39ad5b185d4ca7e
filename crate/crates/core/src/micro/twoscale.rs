//! Two-scale pairings and the ε-convergence study.
//!
//! The pairing of a layer field `f` with a separable test `φ(x1) ψ(x/eps)` is
//! `(1/eps) ∫_{Ω_eps} f φ ψ dx`, evaluated by quadrature on the layer mesh.
//! Cell-periodic fields are read on the cell triangle each layer triangle
//! was copied from, so unfolding a periodic field is exact up to round-off.
//! Time integrals use right-endpoint sums on the common time grid.

use super::{MicroForcing, MicroState, MicroSystem, MonitorReport};
use crate::cell::CellSolutionSet;
use crate::effective::EffectiveCoefficients;
use crate::error::{CheckError, Error};
use crate::fem::assemble::{load_body, load_scalar};
use crate::fem::integrate::{for_each_qp, scalar_value, vec_value, Qp};
use crate::fem::FeMesh;
use crate::forcing::MacroForcing;
use crate::geometry::{LayerGeometry, PeriodicMesh, Phase};
use crate::macro_plate::{reconstruct_micro, MacroSpaces, MacroState, MacroTrajectory};
use crate::material::ElasticityTensor;
use crate::par::Exec;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `(1/eps) ∫_{domain} field φ(x1) ψ(y)` over the layer, with `ψ` a
/// cell-periodic P2 field given on the cell mesh (`None` for `ψ = 1`).
pub fn two_scale_pair<F, G>(
    layer: &LayerGeometry,
    layer_fe: &FeMesh,
    cell_fe: &FeMesh,
    domain: Option<Phase>,
    field: F,
    phi: G,
    psi: Option<&[f64]>,
) -> f64
where
    F: Fn(&Qp) -> f64,
    G: Fn(f64) -> f64,
{
    let mut sum = 0.0;
    for_each_qp(layer_fe, domain, |q| {
        let y = match psi {
            Some(psi) => scalar_value(cell_fe, psi, layer.cell_of(q.t).1, q.l),
            None => 1.0,
        };
        sum += q.w * field(q) * phi(q.x[0]) * y;
    });
    sum / layer.epsilon
}

/// Pairs the cell-periodic field `ψ(x/eps)` with `φ = 1`; returns the layer
/// pairing and its exact value `|Σ| ∫_Z ψ`.
pub fn exact_unfolding_pairing(layer: &LayerGeometry, layer_fe: &FeMesh, cell_fe: &FeMesh, psi: &[f64]) -> (f64, f64) {
    let pair = two_scale_pair(layer, layer_fe, cell_fe, None, |_| 1.0, |_| 1.0, Some(psi));
    let mut cell = 0.0;
    for_each_qp(cell_fe, None, |q| cell += q.w * scalar_value(cell_fe, psi, q.t, q.l));
    (pair, (layer.sigma.1 - layer.sigma.0) * cell)
}

/// Periodic test field used for the unfolding check.
pub fn sanity_field(cell_fe: &FeMesh) -> Vec<f64> {
    cell_fe.coords.iter().map(|x| 1.0 + (2.0 * PI * x[0]).cos() * x[1] + x[1] * x[1]).collect()
}

/// Macro test functions `φ_j(s)` with `s` the normalized position on `Σ`:
/// `1`, `2s - 1`, `sin(π s)`, `sin(2π s)`. Using several keeps a pairing
/// from vanishing by symmetry.
pub const N_TESTS: usize = 4;

fn macro_test(sigma: (f64, f64), j: usize) -> impl Fn(f64) -> f64 + Sync + Send + Copy {
    move |x: f64| {
        let s = (x - sigma.0) / (sigma.1 - sigma.0);
        match j {
            0 => 1.0,
            1 => 2.0 * s - 1.0,
            2 => (PI * s).sin(),
            _ => (2.0 * PI * s).sin(),
        }
    }
}

/// Precomputed load vectors turning spatial pairings into dot products,
/// one per macro test function.
pub struct PairingVectors {
    /// `∫_f φ q` on the pressure space.
    pub p: Vec<Vec<f64>>,
    /// `∫_f φ v_2` on the velocity space.
    pub v2: Vec<Vec<f64>>,
    /// `∫ φ v_2` over the whole layer.
    pub u2: Vec<Vec<f64>>,
}

impl PairingVectors {
    pub fn new(sys: &MicroSystem) -> Self {
        let fe = &sys.fe;
        let tests: Vec<_> = (0..N_TESTS).map(|j| macro_test(sys.layer.sigma, j)).collect();
        Self {
            p: tests.iter().map(|phi| load_scalar(fe, &sys.pressure, Some(Phase::Fluid), |q| phi(q.x[0]))).collect(),
            v2: tests
                .iter()
                .map(|phi| load_body(fe, &sys.velocity, Some(Phase::Fluid), sys.exec, |q| [0.0, phi(q.x[0])]))
                .collect(),
            u2: tests.iter().map(|phi| load_body(fe, &sys.velocity, None, sys.exec, |q| [0.0, phi(q.x[0])])).collect(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inputs shared by all ε levels of a study.
pub struct StudyInput<'a> {
    pub cell_mesh: &'a PeriodicMesh,
    pub cells: &'a CellSolutionSet,
    pub coeffs: &'a EffectiveCoefficients,
    pub material: &'a ElasticityTensor,
    pub spaces: &'a MacroSpaces,
    pub macro_run: &'a MacroTrajectory,
    pub forcing: &'a MacroForcing,
    pub tol: f64,
    pub exec: Exec,
}

/// Micro and limit values of one pairing, per macro test function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairValues {
    pub micro: [f64; N_TESTS],
    pub limit: [f64; N_TESTS],
}

impl PairValues {
    /// Euclidean relative error over the test functions; zero when both
    /// sides vanish.
    pub fn error(&self) -> f64 {
        let d: f64 = self.micro.iter().zip(&self.limit).map(|(a, b)| (a - b).powi(2)).sum();
        let n: f64 = self.limit.iter().map(|b| b * b).sum();
        if d == 0.0 {
            0.0
        } else if n > 0.0 {
            (d / n).sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// One row of the convergence table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub monitors: MonitorReport,
    pub e_p: f64,
    pub e_v: f64,
    pub e_u: f64,
    pub e_rec: f64,
    pub pair_p: PairValues,
    pub pair_v: PairValues,
    pub pair_u: PairValues,
    /// `|pairing - exact|` of the periodic unfolding check.
    pub sanity_error: f64,
    pub velocity_dofs: usize,
    pub triangles: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    /// Ratios `value(eps_{k+1}) / value(eps_k)` for a column.
    pub fn ratios(&self, column: impl Fn(&ConvergenceRow) -> f64) -> Vec<f64> {
        self.rows.windows(2).map(|w| column(&w[1]) / column(&w[0])).collect()
    }
}

/// Macro-side pairing sums over the trajectory.
fn macro_limits(input: &StudyInput, phi: impl Fn(f64) -> f64) -> [f64; 3] {
    let sp = input.spaces;
    let dt = input.macro_run.dt;
    let c = input.coeffs;
    let quad = sp.quadrature();
    let integral = |s: &MacroState, f: &dyn Fn(f64, f64) -> f64| -> f64 {
        quad.iter()
            .map(|&(_, _, x, w)| {
                let m = sp.eval(s, x);
                w * f(m.p, m.w) * phi(x)
            })
            .sum()
    };
    let (mut p, mut v, mut u) = (0.0, 0.0, 0.0);
    for win in input.macro_run.steps.windows(2) {
        let (a, b) = (&win[0].state, &win[1].state);
        p += dt * c.vol_f * integral(b, &|p, _| p);
        v += c.vol_f * (integral(b, &|_, w| w) - integral(a, &|_, w| w));
        u += dt * 2.0 * integral(b, &|_, w| w);
    }
    [p, v, u]
}

/// Squared reconstruction error and squared reference norm at one level.
fn reconstruction_error(
    sys: &MicroSystem,
    input: &StudyInput,
    state: &MicroState,
    prev: &MacroState,
    next: &MacroState,
) -> Result<(f64, f64), Error> {
    let rec = reconstruct_micro(
        input.spaces,
        input.cells,
        input.coeffs,
        &sys.layer,
        prev,
        next,
        input.forcing,
    )?;
    let u = sys.velocity.to_nodal_vec(&state.u);
    let v = sys.velocity.to_nodal_vec(&state.w);
    let fe = &sys.fe;
    let tris: Vec<usize> = (0..fe.mesh.triangles.len()).collect();
    let parts = sys.exec.map(&tris, |&t| {
        let g = fe.geom(t);
        let (mut err, mut norm) = (0.0, 0.0);
        for (l, w) in crate::fem::quadrature::TRI6 {
            let x = g.point(l);
            let r = rec.at(t, l, x);
            let (micro, approx) = match fe.mesh.phases[t] {
                Phase::Solid => (vec_value(fe, &u, t, l), r.u),
                Phase::Fluid => (vec_value(fe, &v, t, l), r.v),
            };
            let wa = w * g.area;
            err += wa * ((micro[0] - approx[0]).powi(2) + (micro[1] - approx[1]).powi(2));
            norm += wa * (approx[0].powi(2) + approx[1].powi(2));
        }
        (err, norm)
    });
    Ok(parts.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d)))
}

fn study_level(eps: f64, input: &StudyInput) -> Result<ConvergenceRow, Error> {
    let sigma = (input.spaces.mesh.a, input.spaces.mesh.b);
    let layer = LayerGeometry::extrude(input.cell_mesh, sigma, eps, input.spaces.sides)?;
    let dt = input.macro_run.dt;
    let sys = MicroSystem::new(&layer, input.material, dt, input.tol, input.exec)?;
    let forcing = MicroForcing::new(*input.forcing, sigma, input.coeffs.vol_f, input.coeffs.vol_s)?;
    let vecs = PairingVectors::new(&sys);
    let steps = &input.macro_run.steps;
    let t_end = dt * (steps.len() - 1) as f64;
    let (mut mp, mut mv, mut mu) = ([0.0; N_TESTS], [0.0; N_TESTS], [0.0; N_TESTS]);
    let (mut rec_err, mut rec_norm) = (0.0, 0.0);
    let mut k = 0usize;
    let run = sys.run_with(&forcing, t_end, |_, next| {
        k += 1;
        let ext = sys.extended_displacement(&next.u)?;
        for j in 0..N_TESTS {
            mp[j] += dt * dot(&vecs.p[j], &next.p) / eps;
            mv[j] += dt * dot(&vecs.v2[j], &next.w) / eps;
            mu[j] += dt * dot(&vecs.u2[j], &ext) / eps;
        }
        let (e, n) = reconstruction_error(&sys, input, next, &steps[k - 1].state, &steps[k].state)?;
        rec_err += dt * e;
        rec_norm += dt * n;
        Ok(())
    })?;
    let (mut lp, mut lv, mut lu) = ([0.0; N_TESTS], [0.0; N_TESTS], [0.0; N_TESTS]);
    for j in 0..N_TESTS {
        [lp[j], lv[j], lu[j]] = macro_limits(input, macro_test(sigma, j));
    }
    let pair_p = PairValues { micro: mp, limit: lp };
    let pair_v = PairValues { micro: mv, limit: lv };
    let pair_u = PairValues { micro: mu, limit: lu };
    let e_rec = if rec_err == 0.0 { 0.0 } else { (rec_err / rec_norm).sqrt() };
    let psi = sanity_field(&input.cells.fe);
    let (pair, exact) = exact_unfolding_pairing(&layer, &sys.fe, &input.cells.fe, &psi);
    Ok(ConvergenceRow {
        epsilon: eps,
        monitors: run.monitors,
        e_p: pair_p.error(),
        e_v: pair_v.error(),
        e_u: pair_u.error(),
        e_rec,
        pair_p,
        pair_v,
        pair_u,
        sanity_error: (pair - exact).abs(),
        velocity_dofs: sys.velocity.n_dofs(),
        triangles: layer.mesh.triangles.len(),
    })
}

/// Runs the micro solver at each ε (concurrently) and compares with the
/// macro trajectory. The micro time step is the macro one.
pub fn convergence_study(eps_list: &[f64], input: &StudyInput) -> Result<ConvergenceStudy, Error> {
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CheckError::InconsistentData(format!("epsilon list must be strictly decreasing: {eps_list:?}")).into());
    }
    if input.cells.mesh_hash != input.coeffs.provenance.mesh_hash {
        return Err(CheckError::MismatchedMesh.into());
    }
    let rows = input.exec.map(eps_list, |&eps| study_level(eps, input));
    Ok(ConvergenceStudy { rows: rows.into_iter().collect::<Result<_, _>>()? })
}
