//! Assembly and backward-Euler time stepping of the coupled macro system.
//!
//! Per step the unknowns `[X, P]` (plate, pressure) solve
//!
//! ```text
//! [ E     C_pd          ] [X]   [ F_X                          ]
//! [ C_dp  -(M + dt K_p) ] [P] = [ C_dp X_old - M P_old - dt F_P ]
//! ```
//!
//! where `E` is the plate stiffness, `M` the `alpha_h`-weighted pressure
//! mass, `K_p` the Darcy stiffness and `C_dp = C_pd^T` the pressure/plate
//! coupling. The matrix is symmetric and the coupling cancels in the energy
//! balance, so the discrete energy cannot grow on load-free steps.

use super::{MacroSpaces, MacroState};
use crate::effective::{check_positivity, EffectiveCoefficients};
use crate::error::{CheckError, Error, SolverError};
use crate::fem::hermite::{hermite_basis, linear_basis};
use crate::fem::{CsrMatrix, DirectSolver, Triplets};
use crate::forcing::MacroForcing;

/// Relative tolerance of the discrete energy decay check.
pub const ENERGY_TOL: f64 = 1e-10;

/// Extra distributed sources `(s_p, s_u, s_w)` at `(t, x)`, added to the
/// pressure, in-plane and transverse equations.
pub type Sources<'a> = &'a (dyn Fn(f64, f64) -> [f64; 3] + Sync);

/// Factored macro system for a fixed time step.
pub struct MacroSolver {
    pub spaces: MacroSpaces,
    pub coeffs: EffectiveCoefficients,
    pub dt: f64,
    /// Plate stiffness `E`.
    pub plate: CsrMatrix,
    /// Coupling assembled from the pressure equation (`n_p x n_plate`).
    pub darcy_coupling: CsrMatrix,
    /// Coupling assembled from the plate equations (`n_plate x n_p`).
    pub plate_coupling: CsrMatrix,
    pub mass_alpha: CsrMatrix,
    pub darcy_stiffness: CsrMatrix,
    pub system: CsrMatrix,
    /// `max |C_dp - C_pd^T|`.
    pub transpose_defect: f64,
    solver: DirectSolver,
}

/// One recorded time level.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroStep {
    pub state: MacroState,
    pub energy: f64,
    /// `E_{k-1} - E_k` (zero at the initial level).
    pub dissipation: f64,
    /// Whether any load was applied on the step that produced this level.
    pub loaded: bool,
}

/// A full macro run.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroTrajectory {
    pub dt: f64,
    pub steps: Vec<MacroStep>,
    pub transpose_defect: f64,
}

impl MacroTrajectory {
    pub fn final_state(&self) -> &MacroState {
        &self.steps.last().expect("trajectory has the initial level").state
    }

    pub fn states(&self) -> impl Iterator<Item = &MacroState> {
        self.steps.iter().map(|s| &s.state)
    }
}

impl MacroSolver {
    pub fn new(coeffs: &EffectiveCoefficients, spaces: &MacroSpaces, dt: f64, tol: f64) -> Result<Self, Error> {
        check_positivity(coeffs)?;
        if !(coeffs.alpha_h > 0.0) {
            return Err(CheckError::NonpositiveAlpha(coeffs.alpha_h).into());
        }
        if !(dt > 0.0) {
            return Err(crate::error::ConfigError::Invalid(format!("time step {dt} must be positive")).into());
        }
        let c = coeffs;
        let c1 = c.b1 - c.vol_f;
        let c2 = c.b2 + c.d_n_f;
        let (np, nx) = (spaces.n_p, spaces.n_plate());
        let mut e_t = Triplets::new(nx, nx);
        let mut cdp = Triplets::new(np, nx);
        let mut cpd = Triplets::new(nx, np);
        let mut m_t = Triplets::new(np, np);
        let mut k_t = Triplets::new(np, np);
        let h = spaces.mesh.h();
        for (e, s, _x, w) in spaces.quadrature() {
            let (lv, ld) = linear_basis(s, h);
            let (_, _, hdd) = hermite_basis(s, h);
            let (ud, wd) = spaces.element_plate_dofs(e);
            let pd = spaces.element_p_dofs(e);
            // Plate test/trial functionals: (dof, U', V'').
            let mut plate: Vec<(usize, f64, f64)> = Vec::with_capacity(6);
            for k in 0..2 {
                if let Some(d) = ud[k] {
                    plate.push((d, ld[k], 0.0));
                }
            }
            for k in 0..4 {
                if let Some(d) = wd[k] {
                    plate.push((d, 0.0, hdd[k]));
                }
            }
            for &(i, ui, vi) in &plate {
                for &(j, uj, vj) in &plate {
                    let v = c.a_star * ui * uj + c.b_star * (vj * ui + uj * vi) + c.c_star * vi * vj;
                    e_t.push(i, j, w * v);
                }
            }
            for k in 0..2 {
                let Some(pi) = pd[k] else { continue };
                // Pressure-equation side: ∂t(c1 u' + c2 w'') tested with phi.
                for &(j, uj, vj) in &plate {
                    cdp.push(pi, j, w * lv[k] * (c1 * uj + c2 * vj));
                }
                // Plate-equation side: p (c1 U' + c2 V'').
                for &(i, ui, vi) in &plate {
                    cpd.push(i, pi, w * (c1 * ui + c2 * vi) * lv[k]);
                }
                for l in 0..2 {
                    let Some(pj) = pd[l] else { continue };
                    m_t.push(pi, pj, w * c.alpha_h * lv[k] * lv[l]);
                    k_t.push(pi, pj, w * c.k * ld[k] * ld[l]);
                }
            }
        }
        let plate = e_t.to_csr();
        let darcy_coupling = cdp.to_csr();
        let plate_coupling = cpd.to_csr();
        let mass_alpha = m_t.to_csr();
        let darcy_stiffness = k_t.to_csr();
        let transpose_defect = darcy_coupling.transpose().add(1.0, &plate_coupling, -1.0).max_abs();
        if transpose_defect > 1e-12 {
            return Err(CheckError::InconsistentData(format!(
                "coupling blocks are not transposes (defect {transpose_defect:.3e})"
            ))
            .into());
        }
        let mut s = Triplets::new(nx + np, nx + np);
        s.add_block(&plate, 0, 0, 1.0);
        s.add_block(&plate_coupling, 0, nx, 1.0);
        s.add_block(&darcy_coupling, nx, 0, 1.0);
        s.add_block(&mass_alpha, nx, nx, -1.0);
        s.add_block(&darcy_stiffness, nx, nx, -dt);
        let system = s.to_csr();
        let solver = DirectSolver::factor(&system, tol)?;
        Ok(Self {
            spaces: spaces.clone(),
            coeffs: coeffs.clone(),
            dt,
            plate,
            darcy_coupling,
            plate_coupling,
            mass_alpha,
            darcy_stiffness,
            system,
            transpose_defect,
            solver,
        })
    }

    /// Load vectors `(F_X, F_P)` at time `t`.
    pub fn loads(&self, t: f64, forcing: &MacroForcing, sources: Option<Sources>) -> (Vec<f64>, Vec<f64>) {
        let sp = &self.spaces;
        let c = &self.coeffs;
        let sigma = (sp.mesh.a, sp.mesh.b);
        let h = sp.mesh.h();
        let mut fx = vec![0.0; sp.n_plate()];
        let mut fp = vec![0.0; sp.n_p];
        for (e, s, x, w) in sp.quadrature() {
            let l = forcing.sample(t, x, sigma);
            let src = sources.map_or([0.0; 3], |f| f(t, x));
            let (lv, ld) = linear_basis(s, h);
            let (hv, hd, _) = hermite_basis(s, h);
            let (ud, wd) = sp.element_plate_dofs(e);
            let pd = sp.element_p_dofs(e);
            let fu = c.vol_f * l.f0 + c.vol_s * l.g0 + src[1];
            let fw = l.f1_bar + l.g1_bar + src[2];
            let fm = c.d_n_f * l.f0 + c.d_n_s * l.g0;
            for k in 0..2 {
                if let Some(d) = ud[k] {
                    fx[d] += w * fu * lv[k];
                }
                if let Some(d) = pd[k] {
                    fp[d] += w * (c.k * l.f0 * ld[k] + src[0] * lv[k]);
                }
            }
            for k in 0..4 {
                if let Some(d) = wd[k] {
                    fx[d] += w * (fw * hv[k] - fm * hd[k]);
                }
            }
        }
        (fx, fp)
    }

    /// Advances `prev` by one step with loads sampled at the new time.
    pub fn step(&self, prev: &MacroState, forcing: &MacroForcing, sources: Option<Sources>) -> Result<MacroState, SolverError> {
        let t = prev.t + self.dt;
        let (fx, fp) = self.loads(t, forcing, sources);
        let cx = self.darcy_coupling.matvec(&prev.x);
        let mp = self.mass_alpha.matvec(&prev.p);
        let mut rhs = fx;
        rhs.extend((0..self.spaces.n_p).map(|i| cx[i] - mp[i] - self.dt * fp[i]));
        let sol = self.solver.solve(&rhs)?;
        let nx = self.spaces.n_plate();
        Ok(MacroState { t, x: sol[..nx].to_vec(), p: sol[nx..].to_vec() })
    }

    /// `1/2 P^T M P + 1/2 X^T E X`.
    pub fn energy(&self, s: &MacroState) -> f64 {
        0.5 * self.mass_alpha.bilinear(&s.p, &s.p) + 0.5 * self.plate.bilinear(&s.x, &s.x)
    }

    /// Solves the stationary problem for loads frozen at time `t`
    /// (the limit of constant-load stepping).
    pub fn stationary(&self, t: f64, forcing: &MacroForcing) -> Result<MacroState, Error> {
        let (fx, fp) = self.loads(t, forcing, None);
        let nx = self.spaces.n_plate();
        let mut s = Triplets::new(nx + self.spaces.n_p, nx + self.spaces.n_p);
        s.add_block(&self.plate, 0, 0, 1.0);
        s.add_block(&self.plate_coupling, 0, nx, 1.0);
        s.add_block(&self.darcy_stiffness, nx, nx, 1.0);
        let mut rhs = fx;
        rhs.extend(fp);
        let sol = DirectSolver::factor(&s.to_csr(), self.solver.tol)?.solve(&rhs)?;
        Ok(MacroState { t, x: sol[..nx].to_vec(), p: sol[nx..].to_vec() })
    }
}

/// Runs from the zero state to `t_end` with step `dt`.
pub fn run(
    coeffs: &EffectiveCoefficients,
    spaces: &MacroSpaces,
    forcing: &MacroForcing,
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<MacroTrajectory, Error> {
    run_with_sources(coeffs, spaces, forcing, None, t_end, dt, tol)
}

/// As [`run`], with additional distributed sources. Every load-free step is
/// checked for energy decay.
pub fn run_with_sources(
    coeffs: &EffectiveCoefficients,
    spaces: &MacroSpaces,
    forcing: &MacroForcing,
    sources: Option<Sources>,
    t_end: f64,
    dt: f64,
    tol: f64,
) -> Result<MacroTrajectory, Error> {
    let solver = MacroSolver::new(coeffs, spaces, dt, tol)?;
    let n_steps = (t_end / dt).round() as usize;
    let mut state = MacroState::zero(spaces);
    let mut energy = 0.0;
    let mut steps = vec![MacroStep { state: state.clone(), energy, dissipation: 0.0, loaded: false }];
    for k in 1..=n_steps {
        let mut next = solver.step(&state, forcing, sources)?;
        next.t = k as f64 * dt;
        let e = solver.energy(&next);
        let loaded = sources.is_some() || forcing.is_active(next.t);
        if !loaded && e > energy * (1.0 + ENERGY_TOL) + f64::MIN_POSITIVE {
            return Err(CheckError::EnergyIncrease { step: k, before: energy, after: e }.into());
        }
        steps.push(MacroStep { state: next.clone(), energy: e, dissipation: energy - e, loaded });
        energy = e;
        state = next;
    }
    Ok(MacroTrajectory { dt, steps, transpose_defect: solver.transpose_defect })
}

/// Cell-integrated fluid velocity `K(f0 - p0') + |Z_f| u1_t - d_n^f w'_t` at
/// element midpoints, from two consecutive levels. Rows are `(x, v1, v2)`;
/// the transverse component is zero.
pub fn darcy_velocity(
    spaces: &MacroSpaces,
    coeffs: &EffectiveCoefficients,
    prev: &MacroState,
    next: &MacroState,
    forcing: &MacroForcing,
) -> Vec<[f64; 3]> {
    let dt = next.t - prev.t;
    let sigma = (spaces.mesh.a, spaces.mesh.b);
    (0..spaces.mesh.n_elements())
        .map(|e| {
            let a = spaces.eval_local(prev, e, 0.5);
            let b = spaces.eval_local(next, e, 0.5);
            let x = spaces.mesh.x(e) + 0.5 * spaces.mesh.h();
            let f0 = forcing.f0.eval(next.t, x, sigma);
            let rate = |p: f64, q: f64| if dt > 0.0 { (q - p) / dt } else { 0.0 };
            let v = coeffs.k * (f0 - b.dp) + coeffs.vol_f * rate(a.u, b.u) - coeffs.d_n_f * rate(a.dw, b.dw);
            [x, v, 0.0]
        })
        .collect()
}
