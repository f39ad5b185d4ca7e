//! The homogenized plate: pressure `p0`, in-plane displacement `u1` and
//! deflection `w` on the midline `Sigma = (a, b)`.
//!
//! `p0` uses continuous P1 elements and vanishes at the traction-free end,
//! `u1` uses P1 elements clamped at both ends and `w` uses cubic Hermite
//! elements with value and slope clamped at both ends.

mod reconstruct;
mod system;

pub use reconstruct::{reconstruct_micro, MacroRate, ReconPoint, Reconstruction};
pub use system::{
    darcy_velocity, run, run_with_sources, MacroSolver, MacroStep, MacroTrajectory, Sources, ENERGY_TOL,
};

use crate::error::GeometryError;
use crate::fem::hermite::{hermite_basis, linear_basis};
use crate::fem::quadrature::GAUSS5;
use crate::geometry::LayerSides;
use serde::{Deserialize, Serialize};

/// Uniform 1D mesh of `(a, b)` with `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroMesh {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl MacroMesh {
    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn n_elements(&self) -> usize {
        self.n - 1
    }

    /// Element containing `x` and the local coordinate in `[0, 1]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.h();
        let e = (((x - self.a) / h).floor().max(0.0) as usize).min(self.n - 2);
        (e, ((x - self.x(e)) / h).clamp(0.0, 1.0))
    }
}

/// Degree-of-freedom layout of the coupled system, ordered `[u1, w, p0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroSpaces {
    pub mesh: MacroMesh,
    pub sides: LayerSides,
    pub p_dof: Vec<Option<usize>>,
    pub u_dof: Vec<Option<usize>>,
    /// `[value, slope]` DOFs per node.
    pub w_dof: Vec<[Option<usize>; 2]>,
    pub n_p: usize,
    pub n_u: usize,
    pub n_w: usize,
}

/// Builds the macro spaces on `(a, b)` with `n` nodes; the pressure vanishes
/// at the end that is not Dirichlet for the fluid.
pub fn build_macro_spaces(a: f64, b: f64, n: usize, sides: LayerSides) -> Result<MacroSpaces, GeometryError> {
    let sides = LayerSides::new(sides.dirichlet_at_a, sides.dirichlet_at_b)?;
    if n < 3 || !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(GeometryError::InvalidParameters(format!("macro mesh ({a}, {b}) with {n} nodes")));
    }
    let neumann_node = if sides.dirichlet_at_a { n - 1 } else { 0 };
    let mut n_p = 0;
    let p_dof = (0..n)
        .map(|i| {
            (i != neumann_node).then(|| {
                n_p += 1;
                n_p - 1
            })
        })
        .collect();
    let u_dof: Vec<Option<usize>> = (0..n).map(|i| (i > 0 && i + 1 < n).then(|| i - 1)).collect();
    let n_u = n - 2;
    let w_dof = (0..n)
        .map(|i| if i > 0 && i + 1 < n { [Some(2 * (i - 1)), Some(2 * (i - 1) + 1)] } else { [None, None] })
        .collect();
    Ok(MacroSpaces { mesh: MacroMesh { a, b, n }, sides, p_dof, u_dof, w_dof, n_p, n_u, n_w: 2 * (n - 2) })
}

/// Values of the macro fields at one point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MacroPoint {
    pub p: f64,
    pub dp: f64,
    pub u: f64,
    pub du: f64,
    pub w: f64,
    pub dw: f64,
    pub ddw: f64,
}

impl MacroSpaces {
    /// Size of the plate block `[u1, w]`.
    pub fn n_plate(&self) -> usize {
        self.n_u + self.n_w
    }

    pub fn n_total(&self) -> usize {
        self.n_plate() + self.n_p
    }

    /// The endpoint where the pressure vanishes.
    pub fn neumann_end(&self) -> f64 {
        if self.sides.dirichlet_at_a {
            self.mesh.b
        } else {
            self.mesh.a
        }
    }

    /// Global plate DOFs of element `e`: `[u_i, u_i+1]` and Hermite `[w_i, w'_i, w_i+1, w'_i+1]`.
    pub fn element_plate_dofs(&self, e: usize) -> ([Option<usize>; 2], [Option<usize>; 4]) {
        let (i, j) = (e, e + 1);
        let w = |d: Option<usize>| d.map(|k| self.n_u + k);
        (
            [self.u_dof[i], self.u_dof[j]],
            [w(self.w_dof[i][0]), w(self.w_dof[i][1]), w(self.w_dof[j][0]), w(self.w_dof[j][1])],
        )
    }

    pub fn element_p_dofs(&self, e: usize) -> [Option<usize>; 2] {
        [self.p_dof[e], self.p_dof[e + 1]]
    }

    /// Evaluates the fields of `state` at `x`.
    pub fn eval(&self, state: &MacroState, x: f64) -> MacroPoint {
        let (e, s) = self.mesh.locate(x);
        self.eval_local(state, e, s)
    }

    pub fn eval_local(&self, state: &MacroState, e: usize, s: f64) -> MacroPoint {
        let h = self.mesh.h();
        let (lv, ld) = linear_basis(s, h);
        let (hv, hd, hdd) = hermite_basis(s, h);
        let (ud, wd) = self.element_plate_dofs(e);
        let pd = self.element_p_dofs(e);
        let get = |v: &[f64], d: Option<usize>| d.map_or(0.0, |k| v[k]);
        let mut out = MacroPoint::default();
        for k in 0..2 {
            let p = get(&state.p, pd[k]);
            let u = get(&state.x, ud[k]);
            out.p += lv[k] * p;
            out.dp += ld[k] * p;
            out.u += lv[k] * u;
            out.du += ld[k] * u;
        }
        for k in 0..4 {
            let w = get(&state.x, wd[k]);
            out.w += hv[k] * w;
            out.dw += hd[k] * w;
            out.ddw += hdd[k] * w;
        }
        out
    }

    /// Gauss points `(element, s, x, weight)` of the whole mesh.
    pub fn quadrature(&self) -> Vec<(usize, f64, f64, f64)> {
        let h = self.mesh.h();
        let mut q = Vec::with_capacity(self.mesh.n_elements() * GAUSS5.len());
        for e in 0..self.mesh.n_elements() {
            for (s, w) in GAUSS5 {
                q.push((e, s, self.mesh.x(e) + s * h, w * h));
            }
        }
        q
    }

    /// `L2` errors of `(p0, u1, w)` against exact profiles.
    pub fn l2_errors(&self, state: &MacroState, exact: impl Fn(f64) -> [f64; 3]) -> [f64; 3] {
        let mut err = [0.0; 3];
        for (e, s, x, w) in self.quadrature() {
            let v = self.eval_local(state, e, s);
            let ex = exact(x);
            err[0] += w * (v.p - ex[0]).powi(2);
            err[1] += w * (v.u - ex[1]).powi(2);
            err[2] += w * (v.w - ex[2]).powi(2);
        }
        err.map(f64::sqrt)
    }

    /// Nodal values `(x, p0, u1, w, w')` for output.
    pub fn nodal_rows(&self, state: &MacroState) -> Vec<[f64; 5]> {
        let get = |v: &[f64], d: Option<usize>| d.map_or(0.0, |k| v[k]);
        (0..self.mesh.n)
            .map(|i| {
                [
                    self.mesh.x(i),
                    get(&state.p, self.p_dof[i]),
                    get(&state.x, self.u_dof[i]),
                    get(&state.x[self.n_u..], self.w_dof[i][0]),
                    get(&state.x[self.n_u..], self.w_dof[i][1]),
                ]
            })
            .collect()
    }
}

/// Macro unknowns at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroState {
    pub t: f64,
    pub p: Vec<f64>,
    /// Plate unknowns `[u1, w]`.
    pub x: Vec<f64>,
}

impl MacroState {
    pub fn zero(spaces: &MacroSpaces) -> Self {
        Self { t: 0.0, p: vec![0.0; spaces.n_p], x: vec![0.0; spaces.n_plate()] }
    }

    pub fn max_abs(&self) -> f64 {
        self.p.iter().chain(&self.x).fold(0.0, |m, v| m.max(v.abs()))
    }
}
