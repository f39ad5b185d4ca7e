//! The thin layer `Sigma x (-eps, eps)` tiled by scaled copies of the cell.

use super::mesh::{EdgeTag, Phase, PeriodicMesh, TriMesh};
use crate::error::GeometryError;

/// Which lateral ends of the fluid carry a Dirichlet (no-flow) condition.
/// Exactly one end must be Dirichlet and the other Neumann.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSides {
    pub dirichlet_at_a: bool,
    pub dirichlet_at_b: bool,
}

impl LayerSides {
    pub fn new(dirichlet_at_a: bool, dirichlet_at_b: bool) -> Result<Self, GeometryError> {
        if dirichlet_at_a && dirichlet_at_b {
            return Err(GeometryError::EmptyBoundaryPart("Neumann part of the lateral boundary".into()));
        }
        if !dirichlet_at_a && !dirichlet_at_b {
            return Err(GeometryError::EmptyBoundaryPart("Dirichlet part of the lateral boundary".into()));
        }
        Ok(Self { dirichlet_at_a, dirichlet_at_b })
    }
}

impl Default for LayerSides {
    fn default() -> Self {
        Self { dirichlet_at_a: true, dirichlet_at_b: false }
    }
}

/// Replicated, scaled cell mesh over `Sigma = (a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGeometry {
    pub sigma: (f64, f64),
    pub epsilon: f64,
    pub n_cells: usize,
    pub sides: LayerSides,
    pub mesh: TriMesh,
    /// Triangles per cell; layer triangle `t` is cell triangle `t % n` of cell `t / n`.
    pub cell_triangles: usize,
}

impl LayerGeometry {
    /// Tiles `sigma` with `(b - a)/eps` copies of the cell mesh scaled by `eps`,
    /// merging shared lateral nodes.
    pub fn extrude(
        cell: &PeriodicMesh,
        sigma: (f64, f64),
        epsilon: f64,
        sides: LayerSides,
    ) -> Result<Self, GeometryError> {
        let (a, b) = sigma;
        if !(b > a) || !(epsilon > 0.0) {
            return Err(GeometryError::InvalidLayer(format!("sigma = ({a}, {b}), eps = {epsilon}")));
        }
        let ratio = (b - a) / epsilon;
        let n_cells = ratio.round();
        if (ratio - n_cells).abs() > 1e-9 * ratio.max(1.0) || n_cells < 1.0 {
            return Err(GeometryError::NonintegerCellCount(ratio));
        }
        let n_cells = n_cells as usize;
        let cm = &cell.mesh;
        let nn = cm.nodes.len();
        let slave_master: Vec<Option<usize>> = {
            let mut v = vec![None; nn];
            for [m, s] in &cell.periodic_pairs {
                v[*s] = Some(*m);
            }
            v
        };
        // Global index of every (cell, node); slaves of cell k are masters of cell k+1.
        let mut map = vec![vec![usize::MAX; nn]; n_cells];
        let mut nodes = Vec::new();
        for k in 0..n_cells {
            for i in 0..nn {
                if slave_master[i].is_none() {
                    map[k][i] = nodes.len();
                    let p = cm.nodes[i];
                    nodes.push([a + epsilon * (p[0] + k as f64), epsilon * p[1]]);
                }
            }
        }
        for k in 0..n_cells {
            for i in 0..nn {
                if let Some(m) = slave_master[i] {
                    map[k][i] = if k + 1 < n_cells {
                        map[k + 1][m]
                    } else {
                        let p = cm.nodes[i];
                        nodes.push([a + epsilon * (p[0] + k as f64), epsilon * p[1]]);
                        nodes.len() - 1
                    };
                }
            }
        }
        let mut triangles = Vec::with_capacity(n_cells * cm.triangles.len());
        let mut phases = Vec::with_capacity(n_cells * cm.triangles.len());
        for k in 0..n_cells {
            for (t, ph) in cm.triangles.iter().zip(&cm.phases) {
                triangles.push([map[k][t[0]], map[k][t[1]], map[k][t[2]]]);
                phases.push(*ph);
            }
        }
        let tol = 1e-12 * (b - a).abs().max(1.0);
        let tag = |mid: [f64; 2], phase: Phase| -> Option<EdgeTag> {
            if (mid[1] - epsilon).abs() < tol {
                Some(EdgeTag::Top)
            } else if (mid[1] + epsilon).abs() < tol {
                Some(EdgeTag::Bottom)
            } else {
                let at_a = (mid[0] - a).abs() < tol;
                let at_b = (mid[0] - b).abs() < tol;
                if !(at_a || at_b) {
                    return None;
                }
                Some(match phase {
                    Phase::Solid => EdgeTag::SolidClamped,
                    Phase::Fluid => {
                        if (at_a && sides.dirichlet_at_a) || (at_b && sides.dirichlet_at_b) {
                            EdgeTag::FluidDirichlet
                        } else {
                            EdgeTag::FluidNeumann
                        }
                    }
                })
            }
        };
        let mesh = TriMesh::new(nodes, triangles, phases, tag)?;
        Ok(Self { sigma, epsilon, n_cells, sides, mesh, cell_triangles: cm.triangles.len() })
    }

    /// Cell index and cell-local triangle index of a layer triangle.
    pub fn cell_of(&self, t: usize) -> (usize, usize) {
        (t / self.cell_triangles, t % self.cell_triangles)
    }

    /// Number of boundary edges per tag, in [`EdgeTag::code`] order.
    pub fn tag_counts(&self) -> [usize; 7] {
        let mut c = [0; 7];
        for e in &self.mesh.boundary_edges {
            c[e.tag.code() as usize] += 1;
        }
        c
    }
}
