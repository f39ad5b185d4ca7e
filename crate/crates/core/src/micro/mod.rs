//! Resolved fluid-structure solver on the thin layer.
//!
//! One global P2 velocity field lives on the whole layer: in the fluid it is
//! the fluid velocity, in the solid the discrete rate of the displacement.
//! Each backward-Euler step solves
//!
//! ```text
//! [ eps K_f + (dt/eps) K_s   -B^T ] [w]   [ F - (1/eps) K_s U ]
//! [ -B                        0   ] [p] = [ 0                 ]
//! ```
//!
//! and updates `U <- U + dt w`. Interface kinematics hold exactly because
//! fluid and solid share the velocity unknowns on the interface.

mod extension;
mod galerkin;
mod twoscale;

pub use extension::Extension;
pub use galerkin::{compare_dae_vs_monolithic, dae_solve, galerkin_reduce, DaeComparison, GalerkinSystem};
pub use twoscale::{
    convergence_study, exact_unfolding_pairing, sanity_field, two_scale_pair, ConvergenceRow, ConvergenceStudy,
    PairValues, PairingVectors, StudyInput, N_TESTS,
};

use crate::error::{CheckError, Error};
use crate::fem::assemble::load_body;
use crate::fem::{assemble_bilinear, CsrMatrix, DirectSolver, Element, FeMesh, Form, FunctionSpace, Triplets};
use crate::forcing::MacroForcing;
use crate::geometry::{EdgeTag, LayerGeometry, Phase};
use crate::material::ElasticityTensor;
use crate::par::Exec;
use serde::{Deserialize, Serialize};

/// Layer loads built from the macroscopic profiles: `(f0, eps f1)` in the
/// fluid and `(g0, eps g1)` in the solid, with `f1 = f1_bar / |Z_f|` and
/// `g1 = g1_bar / |Z_s|` constant across the cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicroForcing {
    pub loads: MacroForcing,
    pub sigma: (f64, f64),
    pub vol_f: f64,
    pub vol_s: f64,
}

impl MicroForcing {
    pub fn new(loads: MacroForcing, sigma: (f64, f64), vol_f: f64, vol_s: f64) -> Result<Self, CheckError> {
        if vol_f <= 0.0 && !(loads.f0.is_zero() && loads.f1_bar.is_zero()) {
            return Err(CheckError::InconsistentData("fluid loads given for a cell without fluid".into()));
        }
        if vol_s <= 0.0 {
            return Err(CheckError::InconsistentData("cell without solid".into()));
        }
        Ok(Self { loads, sigma, vol_f, vol_s })
    }

    pub fn fluid(&self, t: f64, x: f64, eps: f64) -> [f64; 2] {
        let s = self.loads.sample(t, x, self.sigma);
        let f1 = if self.vol_f > 0.0 { s.f1_bar / self.vol_f } else { 0.0 };
        [s.f0, eps * f1]
    }

    pub fn solid(&self, t: f64, x: f64, eps: f64) -> [f64; 2] {
        let s = self.loads.sample(t, x, self.sigma);
        [s.g0, eps * s.g1_bar / self.vol_s]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { loads: self.loads.scaled(s), ..*self }
    }
}

/// Micro unknowns at one time level (DOF vectors of the system spaces).
#[derive(Clone, Debug, PartialEq)]
pub struct MicroState {
    pub t: f64,
    /// Global velocity.
    pub w: Vec<f64>,
    /// Accumulated displacement `U`; meaningful on the solid.
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

/// Per-step norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub t: f64,
    /// `||D(v)||` over the fluid.
    pub dv: f64,
    /// `||D(u)||` over the solid.
    pub du: f64,
    pub p: f64,
    /// `||v - d/dt ext(u)||` over the fluid.
    pub w: f64,
    /// `||v_1||` over the fluid.
    pub v1: f64,
    /// `1/(2 eps) ||A^(1/2) D(u)||^2`.
    pub elastic_energy: f64,
}

/// Scaled a-priori monitors of one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub epsilon: f64,
    pub r_v: f64,
    pub r_u: f64,
    pub r_p: f64,
    pub r_w: f64,
    pub r_vi: f64,
}

/// Summary of a micro run.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroRun {
    pub monitors: MonitorReport,
    pub log: Vec<StepLog>,
    pub final_state: MicroState,
}

/// Assembled and factored micro system for one layer, `eps` and `dt`.
pub struct MicroSystem {
    pub layer: LayerGeometry,
    pub fe: FeMesh,
    pub epsilon: f64,
    pub dt: f64,
    pub material: ElasticityTensor,
    pub velocity: FunctionSpace,
    pub pressure: FunctionSpace,
    /// `∫_f D(w):D(v)`.
    pub k_f: CsrMatrix,
    /// `∫_s A D(w):D(v)`.
    pub k_s: CsrMatrix,
    /// `∫_s D(w):D(v)`.
    pub k_s_plain: CsrMatrix,
    /// `∫_f q div(v)`.
    pub div: CsrMatrix,
    /// Vector mass over the fluid.
    pub mass_f: CsrMatrix,
    /// Vector mass over the solid.
    pub mass_s: CsrMatrix,
    /// Pressure mass over the fluid.
    pub mass_p: CsrMatrix,
    pub system: CsrMatrix,
    pub extension: Extension,
    pub exec: Exec,
    solver: DirectSolver,
}

impl MicroSystem {
    pub fn new(layer: &LayerGeometry, a: &ElasticityTensor, dt: f64, tol: f64, exec: Exec) -> Result<Self, Error> {
        if !(dt > 0.0) {
            return Err(crate::error::ConfigError::Invalid(format!("time step {dt} must be positive")).into());
        }
        let eps = layer.epsilon;
        let fe = FeMesh::new(&layer.mesh);
        let fixed = fe.nodes_on_edges(&[EdgeTag::SolidClamped, EdgeTag::FluidDirichlet]);
        let velocity = FunctionSpace::new(&fe, Element::P2Vec, None, &fixed);
        let pressure = FunctionSpace::new(&fe, Element::P1, Some(Phase::Fluid), &[]);
        let v = &velocity;
        let ((k_f, k_s), (k_s_plain, div)) = exec.join(
            || {
                exec.join(
                    || assemble_bilinear(&fe, Form::Viscous, Some(Phase::Fluid), v, v, exec),
                    || assemble_bilinear(&fe, Form::Elastic(a), Some(Phase::Solid), v, v, exec),
                )
            },
            || {
                exec.join(
                    || assemble_bilinear(&fe, Form::Viscous, Some(Phase::Solid), v, v, exec),
                    || assemble_bilinear(&fe, Form::DivCoupling, Some(Phase::Fluid), &pressure, v, exec),
                )
            },
        );
        let (k_f, k_s, k_s_plain, div) = (k_f?, k_s?, k_s_plain?, div?);
        let mass_f = assemble_bilinear(&fe, Form::Mass(1.0), Some(Phase::Fluid), v, v, exec)?;
        let mass_s = assemble_bilinear(&fe, Form::Mass(1.0), Some(Phase::Solid), v, v, exec)?;
        let mass_p = assemble_bilinear(&fe, Form::Mass(1.0), Some(Phase::Fluid), &pressure, &pressure, exec)?;
        let (nv, np) = (velocity.n_dofs(), pressure.n_dofs());
        let mut t = Triplets::new(nv + np, nv + np);
        t.add_block(&k_f, 0, 0, eps);
        t.add_block(&k_s, 0, 0, dt / eps);
        t.add_block_transposed(&div, 0, nv, -1.0);
        t.add_block(&div, nv, 0, -1.0);
        let system = t.to_csr();
        let solver = DirectSolver::factor(&system, tol)?;
        let extension = Extension::new(&fe, exec, tol)?;
        Ok(Self {
            layer: layer.clone(),
            fe,
            epsilon: eps,
            dt,
            material: *a,
            velocity,
            pressure,
            k_f,
            k_s,
            k_s_plain,
            div,
            mass_f,
            mass_s,
            mass_p,
            system,
            extension,
            exec,
            solver,
        })
    }

    pub fn zero_state(&self) -> MicroState {
        let nv = self.velocity.n_dofs();
        MicroState { t: 0.0, w: vec![0.0; nv], u: vec![0.0; nv], p: vec![0.0; self.pressure.n_dofs()] }
    }

    /// Load vector `∫_f f_eps . v + ∫_s g_eps . v` at time `t`.
    pub fn load(&self, forcing: &MicroForcing, t: f64) -> Vec<f64> {
        let eps = self.epsilon;
        let lf = load_body(&self.fe, &self.velocity, Some(Phase::Fluid), self.exec, |q| forcing.fluid(t, q.x[0], eps));
        let ls = load_body(&self.fe, &self.velocity, Some(Phase::Solid), self.exec, |q| forcing.solid(t, q.x[0], eps));
        lf.iter().zip(&ls).map(|(a, b)| a + b).collect()
    }

    /// One backward-Euler step with the given load vector.
    pub fn step_with_load(&self, prev: &MicroState, load: &[f64]) -> Result<MicroState, Error> {
        let eps = self.epsilon;
        let ku = self.k_s.matvec(&prev.u);
        let mut rhs: Vec<f64> = load.iter().zip(&ku).map(|(f, k)| f - k / eps).collect();
        rhs.extend(std::iter::repeat(0.0).take(self.pressure.n_dofs()));
        let sol = self.solver.solve(&rhs)?;
        let nv = self.velocity.n_dofs();
        let w = sol[..nv].to_vec();
        let u = prev.u.iter().zip(&w).map(|(u, w)| u + self.dt * w).collect();
        Ok(MicroState { t: prev.t + self.dt, w, u, p: sol[nv..].to_vec() })
    }

    pub fn step(&self, prev: &MicroState, forcing: &MicroForcing) -> Result<MicroState, Error> {
        let load = self.load(forcing, prev.t + self.dt);
        self.step_with_load(prev, &load)
    }

    /// `w - ext(w)` on the fluid: the velocity relative to the extended solid motion.
    pub fn relative_velocity(&self, w: &[f64]) -> Result<Vec<f64>, Error> {
        let ext = self.extension.apply(&self.velocity, w)?;
        Ok(w.iter().zip(&ext).map(|(a, b)| a - b).collect())
    }

    /// Extended displacement: solid displacement harmonically continued into the fluid.
    pub fn extended_displacement(&self, u: &[f64]) -> Result<Vec<f64>, Error> {
        Ok(self.extension.apply(&self.velocity, u)?)
    }

    fn first_component(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, v)| if i % 2 == 0 { *v } else { 0.0 }).collect()
    }

    /// Norms of one state.
    pub fn norms(&self, s: &MicroState) -> Result<(StepLog, Vec<f64>), Error> {
        let rel = self.relative_velocity(&s.w)?;
        let v1 = self.first_component(&s.w);
        let log = StepLog {
            t: s.t,
            dv: self.k_f.bilinear(&s.w, &s.w).max(0.0).sqrt(),
            du: self.k_s_plain.bilinear(&s.u, &s.u).max(0.0).sqrt(),
            p: self.mass_p.bilinear(&s.p, &s.p).max(0.0).sqrt(),
            w: self.mass_f.bilinear(&rel, &rel).max(0.0).sqrt(),
            v1: self.mass_f.bilinear(&v1, &v1).max(0.0).sqrt(),
            elastic_energy: 0.5 / self.epsilon * self.k_s.bilinear(&s.u, &s.u),
        };
        Ok((log, rel))
    }

    /// Runs from the zero state to `t_end`, calling `observe(prev, next)` after
    /// each step. Checks the discrete energy inequality on load-free steps.
    pub fn run_with<F>(&self, forcing: &MicroForcing, t_end: f64, mut observe: F) -> Result<MicroRun, Error>
    where
        F: FnMut(&MicroState, &MicroState) -> Result<(), Error>,
    {
        let eps = self.epsilon;
        let dt = self.dt;
        let n_steps = (t_end / dt).round() as usize;
        let mut state = self.zero_state();
        let mut acc = MonitorAccumulator::new(self, dt);
        let mut log = Vec::with_capacity(n_steps);
        let mut prev_energy = 0.0;
        for k in 1..=n_steps {
            let mut next = self.step(&state, forcing)?;
            next.t = k as f64 * dt;
            let (entry, rel) = self.norms(&next)?;
            if !forcing.loads.is_active(next.t) {
                let dissipation = eps * dt * self.k_f.bilinear(&next.w, &next.w);
                let balance = dissipation + entry.elastic_energy - prev_energy;
                let scale = prev_energy.abs().max(dissipation).max(f64::MIN_POSITIVE);
                if balance > 1e-9 * scale {
                    return Err(CheckError::EnergyIncrease { step: k, before: prev_energy, after: entry.elastic_energy + dissipation }.into());
                }
            }
            prev_energy = entry.elastic_energy;
            acc.add(self, &state, &next, &rel);
            observe(&state, &next)?;
            log.push(entry);
            state = next;
        }
        Ok(MicroRun { monitors: acc.report(eps), log, final_state: state })
    }

    /// Runs and keeps every state (intended for small problems).
    pub fn run_trajectory(&self, forcing: &MicroForcing, t_end: f64) -> Result<(MicroRun, Vec<MicroState>), Error> {
        let mut states = vec![self.zero_state()];
        let run = self.run_with(forcing, t_end, |_, next| {
            states.push(next.clone());
            Ok(())
        })?;
        Ok((run, states))
    }
}

/// Sums for the scaled space-time norms.
struct MonitorAccumulator {
    dt: f64,
    dv: f64,
    du_max: f64,
    p: f64,
    w: f64,
    v1: f64,
    prev_rel: Vec<f64>,
}

impl MonitorAccumulator {
    fn new(sys: &MicroSystem, dt: f64) -> Self {
        Self { dt, dv: 0.0, du_max: 0.0, p: 0.0, w: 0.0, v1: 0.0, prev_rel: vec![0.0; sys.velocity.n_dofs()] }
    }

    /// Adds `dt (|a|^2 + |(a - a_prev)/dt|^2)` for each monitored quantity.
    fn add(&mut self, sys: &MicroSystem, prev: &MicroState, next: &MicroState, rel: &[f64]) {
        let dt = self.dt;
        let h1 = |m: &CsrMatrix, a: &[f64], b: &[f64]| {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) / dt).collect();
            dt * (m.bilinear(a, a) + m.bilinear(&d, &d))
        };
        self.dv += h1(&sys.k_f, &next.w, &prev.w);
        self.p += h1(&sys.mass_p, &next.p, &prev.p);
        self.w += h1(&sys.mass_f, rel, &self.prev_rel);
        let (a1, b1) = (sys.first_component(&next.w), sys.first_component(&prev.w));
        self.v1 += h1(&sys.mass_f, &a1, &b1);
        self.du_max = self.du_max.max(sys.k_s_plain.bilinear(&next.u, &next.u).max(0.0).sqrt());
        self.prev_rel = rel.to_vec();
    }

    fn report(&self, eps: f64) -> MonitorReport {
        let s = |x: f64| x.max(0.0).sqrt();
        MonitorReport {
            epsilon: eps,
            r_v: eps.powf(-0.5) * s(self.dv),
            r_u: eps.powf(-1.5) * self.du_max,
            r_p: eps.powf(-0.5) * s(self.p),
            r_w: eps.powf(-1.5) * s(self.w),
            r_vi: eps.powf(-1.5) * s(self.v1),
        }
    }
}

/// Builds the layer and runs the micro solver.
pub fn run_micro(
    layer: &LayerGeometry,
    a: &ElasticityTensor,
    forcing: &MicroForcing,
    t_end: f64,
    dt: f64,
    tol: f64,
    exec: Exec,
) -> Result<MicroRun, Error> {
    MicroSystem::new(layer, a, dt, tol, exec)?.run_with(forcing, t_end, |_, _| Ok(()))
}
