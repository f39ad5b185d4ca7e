//! Approximate microscopic fields built from the macro solution and the
//! cell correctors.
//!
//! With `x2 = eps y2` and macro fields evaluated at `x1`:
//!
//! ```text
//! u_app = w e2 + eps (u1 e1 - y2 w' e1) + eps^2 (u1' chi_11 + w'' chiB_11 + p0 chi_0)   (solid)
//! v_app = w_t e2 + eps ((f0 - p0') q_1 + u1_t e1 - y2 w'_t e1)                           (fluid)
//! p_app = p0                                                                             (fluid)
//! ```
//!
//! Cell fields are read on the cell triangle a layer triangle was copied
//! from, at the same barycentric point, so no interpolation is involved.

use super::{MacroPoint, MacroSpaces, MacroState};
use crate::cell::CellSolutionSet;
use crate::effective::EffectiveCoefficients;
use crate::error::CheckError;
use crate::fem::integrate::vec_value;
use crate::fem::FeMesh;
use crate::forcing::MacroForcing;
use crate::geometry::{LayerGeometry, Phase};

/// Discrete time derivatives of the macro fields.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MacroRate {
    pub du: f64,
    pub dw: f64,
    pub ddw_dx: f64,
}

/// Reconstructed fields at one point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ReconPoint {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub p: f64,
}

/// Reconstruction between two consecutive macro levels.
pub struct Reconstruction<'a> {
    pub spaces: &'a MacroSpaces,
    pub cells: &'a CellSolutionSet,
    pub layer: &'a LayerGeometry,
    pub prev: &'a MacroState,
    pub next: &'a MacroState,
    pub forcing: &'a MacroForcing,
    pub epsilon: f64,
}

/// Prepares the reconstruction at time `next.t`.
pub fn reconstruct_micro<'a>(
    spaces: &'a MacroSpaces,
    cells: &'a CellSolutionSet,
    coeffs: &EffectiveCoefficients,
    layer: &'a LayerGeometry,
    prev: &'a MacroState,
    next: &'a MacroState,
    forcing: &'a MacroForcing,
) -> Result<Reconstruction<'a>, CheckError> {
    if cells.fe.mesh.triangles.len() != layer.cell_triangles {
        return Err(CheckError::MissingCellSolutions(format!(
            "cell solutions have {} triangles, layer cells have {}",
            cells.fe.mesh.triangles.len(),
            layer.cell_triangles
        )));
    }
    if cells.mesh_hash != coeffs.provenance.mesh_hash {
        return Err(CheckError::MismatchedMesh);
    }
    Ok(Reconstruction { spaces, cells, layer, prev, next, forcing, epsilon: layer.epsilon })
}

impl Reconstruction<'_> {
    fn macro_at(&self, x1: f64) -> (MacroPoint, MacroRate) {
        let a = self.spaces.eval(self.prev, x1);
        let b = self.spaces.eval(self.next, x1);
        let dt = self.next.t - self.prev.t;
        let r = |p: f64, q: f64| if dt > 0.0 { (q - p) / dt } else { 0.0 };
        (b, MacroRate { du: r(a.u, b.u), dw: r(a.w, b.w), ddw_dx: r(a.dw, b.dw) })
    }

    /// Fields at barycentric point `l` of layer triangle `t` located at `x`.
    pub fn at(&self, t: usize, l: [f64; 3], x: [f64; 2]) -> ReconPoint {
        let eps = self.epsilon;
        let (_, tc) = self.layer.cell_of(t);
        let y2 = x[1] / eps;
        let (m, rate) = self.macro_at(x[0]);
        let cf = &self.cells.fe;
        let mut out = ReconPoint { p: m.p, ..Default::default() };
        match self.layer.mesh.phases[t] {
            Phase::Solid => {
                let c11 = vec_value(cf, &self.cells.chi[0][0], tc, l);
                let cb = vec_value(cf, &self.cells.chi_b[0][0], tc, l);
                let c0 = vec_value(cf, &self.cells.chi0, tc, l);
                let e2 = eps * eps;
                out.u = [
                    eps * (m.u - y2 * m.dw) + e2 * (m.du * c11[0] + m.ddw * cb[0] + m.p * c0[0]),
                    m.w + e2 * (m.du * c11[1] + m.ddw * cb[1] + m.p * c0[1]),
                ];
            }
            Phase::Fluid => {
                let f0 = self.forcing.f0.eval(self.next.t, x[0], (self.spaces.mesh.a, self.spaces.mesh.b));
                let q1 = vec_value(cf, &self.cells.q[0], tc, l);
                let g = f0 - m.dp;
                out.v = [eps * (g * q1[0] + rate.du - y2 * rate.ddw_dx), rate.dw + eps * g * q1[1]];
            }
        }
        out
    }

    /// Nodal samples on the layer's P2 nodes: solid nodes carry `u`, fluid
    /// nodes `v` and vertex values of `p`.
    pub fn to_nodal(&self, layer_fe: &FeMesh) -> (Vec<[f64; 2]>, Vec<[f64; 2]>, Vec<f64>) {
        let nn = layer_fe.n_nodes();
        let mut u = vec![[0.0; 2]; nn];
        let mut v = vec![[0.0; 2]; nn];
        let mut p = vec![0.0; nn];
        const LOCAL: [[f64; 3]; 6] = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
        ];
        for (t, nodes) in layer_fe.tri_nodes.iter().enumerate() {
            for (a, l) in LOCAL.iter().enumerate() {
                let r = self.at(t, *l, layer_fe.coords[nodes[a]]);
                match layer_fe.mesh.phases[t] {
                    Phase::Solid => u[nodes[a]] = r.u,
                    Phase::Fluid => {
                        v[nodes[a]] = r.v;
                        p[nodes[a]] = r.p;
                    }
                }
            }
        }
        (u, v, p)
    }
}

