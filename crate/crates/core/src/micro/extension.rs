//! Harmonic extension of interface values into the fluid.
//!
//! Given a field on the global velocity space, the fluid-interior values are
//! replaced by the component-wise discrete harmonic extension of its values
//! on the fluid boundary (interface nodes and no-flow ends). Solid values are
//! left untouched, so the result is an `H^1` field on the whole layer that
//! coincides with the solid field.

use crate::error::{Error, SolverError};
use crate::fem::{assemble_bilinear, CsrMatrix, DirectSolver, Element, FeMesh, Form, FunctionSpace};
use crate::geometry::{EdgeTag, Phase};
use crate::par::Exec;

pub struct Extension {
    /// Scalar fluid DOFs (all fluid nodes).
    all: FunctionSpace,
    /// Fluid-interior node of each free scalar DOF.
    free_nodes: Vec<usize>,
    /// Laplacian rows of free DOFs, columns of all fluid DOFs.
    k_fa: CsrMatrix,
    solver: Option<DirectSolver>,
}

impl Extension {
    pub fn new(fe: &FeMesh, exec: Exec, tol: f64) -> Result<Self, Error> {
        let mut fixed = fe.shared_nodes();
        for (f, d) in fixed.iter_mut().zip(fe.nodes_on_edges(&[EdgeTag::FluidDirichlet])) {
            *f |= d;
        }
        let free = FunctionSpace::new(fe, Element::P2, Some(Phase::Fluid), &fixed);
        let all = FunctionSpace::new(fe, Element::P2, Some(Phase::Fluid), &[]);
        let mut free_nodes = vec![usize::MAX; free.n_dofs()];
        for (n, d) in free.node_dof.iter().enumerate() {
            if let Some(d) = d {
                free_nodes[*d] = n;
            }
        }
        let k_fa = assemble_bilinear(fe, Form::Laplace(1.0), Some(Phase::Fluid), &free, &all, exec)?;
        let solver = if free.n_dofs() > 0 {
            let k_ff = assemble_bilinear(fe, Form::Laplace(1.0), Some(Phase::Fluid), &free, &free, exec)?;
            Some(DirectSolver::factor(&k_ff, tol)?)
        } else {
            None
        };
        Ok(Self { all, free_nodes, k_fa, solver })
    }

    /// Extends `x` (a DOF vector of the vector space `vel`) into the fluid.
    pub fn apply(&self, vel: &FunctionSpace, x: &[f64]) -> Result<Vec<f64>, SolverError> {
        let mut out = x.to_vec();
        let Some(solver) = &self.solver else { return Ok(out) };
        for c in 0..2 {
            let mut g = vec![0.0; self.all.n_dofs()];
            for (n, d) in self.all.node_dof.iter().enumerate() {
                if let (Some(d), Some(v)) = (d, vel.node_dof[n]) {
                    g[*d] = x[2 * v + c];
                }
            }
            // Free entries of g must not contribute: zero them.
            for &n in &self.free_nodes {
                if let Some(d) = self.all.node_dof[n] {
                    g[d] = 0.0;
                }
            }
            let rhs: Vec<f64> = self.k_fa.matvec(&g).iter().map(|v| -v).collect();
            let y = solver.solve(&rhs)?;
            for (j, &n) in self.free_nodes.iter().enumerate() {
                if let Some(v) = vel.node_dof[n] {
                    out[2 * v + c] = y[j];
                }
            }
        }
        Ok(out)
    }
}

