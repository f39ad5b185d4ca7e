//! P2 node topology and degree-of-freedom maps with periodic identification,
//! Dirichlet elimination and subdomain restriction.

use super::p2::{TriGeom, EDGE_LOCAL};
use crate::geometry::{EdgeTag, PeriodicMesh, Phase, TriMesh};
use std::collections::HashMap;

/// A triangle mesh together with its P2 node numbering.
#[derive(Clone, Debug)]
pub struct FeMesh {
    pub mesh: TriMesh,
    pub n_vertices: usize,
    pub edges: Vec<[usize; 2]>,
    /// Six P2 nodes per triangle (vertices, then edge midpoints).
    pub tri_nodes: Vec<[usize; 6]>,
    /// Coordinates of all P2 nodes.
    pub coords: Vec<[f64; 2]>,
    /// Periodic representative of every P2 node.
    pub rep: Vec<usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl FeMesh {
    /// Non-periodic P2 mesh.
    pub fn new(mesh: &TriMesh) -> Self {
        let nv = mesh.nodes.len();
        let rep: Vec<usize> = (0..nv).collect();
        Self::build(mesh, &rep)
    }

    /// P2 mesh of a periodic cell; slave nodes (vertices and edge midpoints)
    /// are identified with their masters.
    pub fn periodic(pm: &PeriodicMesh) -> Self {
        Self::build(&pm.mesh, &pm.rep)
    }

    fn build(mesh: &TriMesh, vrep: &[usize]) -> Self {
        let nv = mesh.nodes.len();
        let mut edge_index = HashMap::new();
        let mut edges = Vec::new();
        let mut tri_nodes = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let mut n = [t[0], t[1], t[2], 0, 0, 0];
            for (k, [a, b]) in EDGE_LOCAL.iter().enumerate() {
                let (u, v) = (t[*a], t[*b]);
                let key = (u.min(v), u.max(v));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                n[3 + k] = nv + e;
            }
            tri_nodes.push(n);
        }
        let mut coords = mesh.nodes.clone();
        for [a, b] in &edges {
            let (p, q) = (mesh.nodes[*a], mesh.nodes[*b]);
            coords.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        }
        let mut rep: Vec<usize> = (0..coords.len()).collect();
        rep[..nv].copy_from_slice(vrep);
        for (e, [a, b]) in edges.iter().enumerate() {
            let (ra, rb) = (vrep[*a], vrep[*b]);
            if (ra, rb) != (*a, *b) {
                if let Some(&m) = edge_index.get(&(ra.min(rb), ra.max(rb))) {
                    rep[nv + e] = nv + m;
                }
            }
        }
        Self { mesh: mesh.clone(), n_vertices: nv, edges, tri_nodes, coords, rep, edge_index }
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn geom(&self, t: usize) -> TriGeom {
        let [a, b, c] = self.mesh.triangles[t];
        TriGeom::new([self.mesh.nodes[a], self.mesh.nodes[b], self.mesh.nodes[c]])
    }

    /// P2 midpoint node of the edge between two vertices.
    pub fn edge_node(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).map(|e| self.n_vertices + e)
    }

    /// Triangles belonging to `domain` (`None` = all).
    pub fn triangles_in(&self, domain: Option<Phase>) -> Vec<usize> {
        (0..self.mesh.triangles.len()).filter(|&t| domain.map_or(true, |p| self.mesh.phases[t] == p)).collect()
    }

    /// Marks the P2 nodes (vertices and midpoints) of all edges with one of the tags.
    pub fn nodes_on_edges(&self, tags: &[EdgeTag]) -> Vec<bool> {
        let mut mark = vec![false; self.n_nodes()];
        for e in &self.mesh.boundary_edges {
            if tags.contains(&e.tag) {
                mark[e.nodes[0]] = true;
                mark[e.nodes[1]] = true;
                if let Some(m) = self.edge_node(e.nodes[0], e.nodes[1]) {
                    mark[m] = true;
                }
            }
        }
        mark
    }

    /// Marks nodes belonging to at least one triangle of each phase.
    pub fn shared_nodes(&self) -> Vec<bool> {
        let mut fl = vec![false; self.n_nodes()];
        let mut so = vec![false; self.n_nodes()];
        for (t, nodes) in self.tri_nodes.iter().enumerate() {
            let target = if self.mesh.phases[t] == Phase::Fluid { &mut fl } else { &mut so };
            for &n in nodes {
                target[n] = true;
            }
        }
        fl.iter().zip(&so).map(|(a, b)| *a && *b).collect()
    }
}

/// Lagrange element family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Element {
    P1,
    P2,
    P2Vec,
}

impl Element {
    pub fn name(self) -> &'static str {
        match self {
            Element::P1 => "P1 scalar",
            Element::P2 => "P2 scalar",
            Element::P2Vec => "P2 vector",
        }
    }
}

/// Degrees of freedom of a Lagrange space on (part of) a mesh.
#[derive(Clone, Debug)]
pub struct FunctionSpace {
    pub element: Element,
    pub domain: Option<Phase>,
    /// Scalar DOF of every P2 node (`None`: inactive or fixed to zero).
    pub node_dof: Vec<Option<usize>>,
    pub n_scalar: usize,
}

impl FunctionSpace {
    /// Builds a space on the triangles of `domain`; nodes flagged in `fixed`
    /// are eliminated (homogeneous Dirichlet). Periodic images share one DOF.
    pub fn new(fe: &FeMesh, element: Element, domain: Option<Phase>, fixed: &[bool]) -> Self {
        let nn = fe.n_nodes();
        let mut active = vec![false; nn];
        let local = if element == Element::P1 { 3 } else { 6 };
        for t in fe.triangles_in(domain) {
            for &n in &fe.tri_nodes[t][..local] {
                active[n] = true;
            }
        }
        let mut rep_fixed = vec![false; nn];
        for n in 0..nn {
            if active[n] && fixed.get(n).copied().unwrap_or(false) {
                rep_fixed[fe.rep[n]] = true;
            }
        }
        let mut rep_dof = vec![None; nn];
        let mut count = 0;
        for n in 0..nn {
            let r = fe.rep[n];
            if active[n] && !rep_fixed[r] && rep_dof[r].is_none() {
                rep_dof[r] = Some(count);
                count += 1;
            }
        }
        let node_dof = (0..nn).map(|n| if active[n] { rep_dof[fe.rep[n]] } else { None }).collect();
        Self { element, domain, node_dof, n_scalar: count }
    }

    pub fn n_dofs(&self) -> usize {
        match self.element {
            Element::P2Vec => 2 * self.n_scalar,
            _ => self.n_scalar,
        }
    }

    pub fn components(&self) -> usize {
        if self.element == Element::P2Vec {
            2
        } else {
            1
        }
    }

    /// Number of local basis functions per triangle.
    pub fn local_size(&self) -> usize {
        match self.element {
            Element::P1 => 3,
            Element::P2 => 6,
            Element::P2Vec => 12,
        }
    }

    /// Global DOFs of the local basis functions of triangle `t`. Vector
    /// spaces interleave components: local index `2 a + c`.
    pub fn local_dofs(&self, fe: &FeMesh, t: usize) -> Vec<Option<usize>> {
        let nodes = &fe.tri_nodes[t];
        match self.element {
            Element::P1 => nodes[..3].iter().map(|&n| self.node_dof[n]).collect(),
            Element::P2 => nodes.iter().map(|&n| self.node_dof[n]).collect(),
            Element::P2Vec => nodes
                .iter()
                .flat_map(|&n| {
                    let d = self.node_dof[n];
                    [d.map(|d| 2 * d), d.map(|d| 2 * d + 1)]
                })
                .collect(),
        }
    }

    /// Expands a DOF vector of a vector space to per-node values.
    pub fn to_nodal_vec(&self, x: &[f64]) -> Vec<[f64; 2]> {
        assert_eq!(self.element, Element::P2Vec);
        self.node_dof.iter().map(|d| d.map_or([0.0, 0.0], |d| [x[2 * d], x[2 * d + 1]])).collect()
    }

    /// Expands a DOF vector of a scalar space to per-node values.
    pub fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        assert_ne!(self.element, Element::P2Vec);
        self.node_dof.iter().map(|d| d.map_or(0.0, |d| x[d])).collect()
    }

    /// Restricts per-node vector values to a DOF vector.
    pub fn from_nodal_vec(&self, v: &[[f64; 2]]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs()];
        for (n, d) in self.node_dof.iter().enumerate() {
            if let Some(d) = d {
                x[2 * d] = v[n][0];
                x[2 * d + 1] = v[n][1];
            }
        }
        x
    }

    /// Restricts per-node scalar values to a DOF vector.
    pub fn from_nodal(&self, v: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs()];
        for (n, d) in self.node_dof.iter().enumerate() {
            if let Some(d) = d {
                x[*d] = v[n];
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellGeometry;

    #[test]
    fn periodic_p2_identification() {
        let pm = CellGeometry::solid().mesh(0.25).unwrap();
        let fe = FeMesh::periodic(&pm);
        // Every node on y1 = 1 maps to a node on y1 = 0 at the same height.
        for (n, p) in fe.coords.iter().enumerate() {
            let r = fe.rep[n];
            if (p[0] - 1.0).abs() < 1e-12 {
                assert_ne!(r, n);
                assert!(fe.coords[r][0].abs() < 1e-12 && (fe.coords[r][1] - p[1]).abs() < 1e-12);
            } else {
                assert_eq!(r, n);
            }
        }
        let space = FunctionSpace::new(&fe, Element::P2, None, &[]);
        let lateral = fe.coords.iter().filter(|p| (p[0] - 1.0).abs() < 1e-12).count();
        assert_eq!(space.n_dofs(), fe.n_nodes() - lateral);
    }

    #[test]
    fn dirichlet_and_restriction() {
        let pm = CellGeometry::channel(-0.3, 0.3).unwrap().mesh(0.25).unwrap();
        let fe = FeMesh::periodic(&pm);
        let fixed = fe.nodes_on_edges(&[EdgeTag::Interface]);
        let v = FunctionSpace::new(&fe, Element::P2Vec, Some(Phase::Fluid), &fixed);
        for (n, d) in v.node_dof.iter().enumerate() {
            if fixed[n] {
                assert!(d.is_none());
            }
            if d.is_some() {
                assert!(fe.coords[n][1] > -0.3 && fe.coords[n][1] < 0.3);
            }
        }
        let x: Vec<f64> = (0..v.n_dofs()).map(|i| i as f64).collect();
        assert_eq!(v.from_nodal_vec(&v.to_nodal_vec(&x)), x);
    }
}
