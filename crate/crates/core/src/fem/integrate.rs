//! Quadrature of functionals of nodal fields over subdomains and edge sets.

use super::assemble::edge_bary;
use super::p2::{p2_grads, p2_values, TriGeom};
use super::quadrature::{GAUSS3, TRI6};
use super::space::FeMesh;
use crate::error::FemError;
use crate::geometry::{EdgeTag, Phase};

/// A volume quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct Qp {
    pub t: usize,
    pub l: [f64; 3],
    pub x: [f64; 2],
    /// Quadrature weight including the triangle area.
    pub w: f64,
    pub geom: TriGeom,
}

/// An edge quadrature point; `l` refers to the edge's recorded triangle.
#[derive(Clone, Copy, Debug)]
pub struct EdgeQp {
    pub t: usize,
    pub l: [f64; 3],
    pub x: [f64; 2],
    pub w: f64,
    pub normal: [f64; 2],
}

/// Visits every volume quadrature point of `domain` in a fixed order.
pub fn for_each_qp<F: FnMut(&Qp)>(fe: &FeMesh, domain: Option<Phase>, mut f: F) {
    for t in fe.triangles_in(domain) {
        let geom = fe.geom(t);
        for (l, w) in TRI6 {
            f(&Qp { t, l, x: geom.point(l), w: w * geom.area, geom });
        }
    }
}

/// `∫_domain f`.
pub fn integrate<F: FnMut(&Qp) -> f64>(fe: &FeMesh, domain: Option<Phase>, mut f: F) -> f64 {
    let mut s = 0.0;
    for_each_qp(fe, domain, |q| s += q.w * f(q));
    s
}

/// `∫_E f` over edges with the given tag; fails if there are none.
pub fn integrate_edges<F: FnMut(&EdgeQp) -> f64>(fe: &FeMesh, tag: EdgeTag, mut f: F) -> Result<f64, FemError> {
    let mut s = 0.0;
    let mut any = false;
    for e in fe.mesh.edges_with_tag(tag) {
        any = true;
        let (normal, len) = fe.mesh.edge_normal(e);
        let tri = fe.mesh.triangles[e.triangle];
        let geom = fe.geom(e.triangle);
        for (u, w) in GAUSS3 {
            let l = edge_bary(tri, e.nodes, u);
            s += w * len * f(&EdgeQp { t: e.triangle, l, x: geom.point(l), w: w * len, normal });
        }
    }
    if any {
        Ok(s)
    } else {
        Err(FemError::RegionEmpty(tag.name().to_string()))
    }
}

/// Value of a nodal P2 vector field at barycentric point `l` of triangle `t`.
pub fn vec_value(fe: &FeMesh, field: &[[f64; 2]], t: usize, l: [f64; 3]) -> [f64; 2] {
    let v = p2_values(l);
    let nodes = &fe.tri_nodes[t];
    let mut out = [0.0; 2];
    for a in 0..6 {
        out[0] += v[a] * field[nodes[a]][0];
        out[1] += v[a] * field[nodes[a]][1];
    }
    out
}

/// Value of a nodal P2 scalar field.
pub fn scalar_value(fe: &FeMesh, field: &[f64], t: usize, l: [f64; 3]) -> f64 {
    let v = p2_values(l);
    fe.tri_nodes[t].iter().zip(v).map(|(n, v)| v * field[*n]).sum()
}

/// Value of a P1 field given by its vertex values (midpoint entries ignored).
pub fn p1_value(fe: &FeMesh, field: &[f64], t: usize, l: [f64; 3]) -> f64 {
    let n = &fe.tri_nodes[t];
    l[0] * field[n[0]] + l[1] * field[n[1]] + l[2] * field[n[2]]
}

/// Gradient of a P1 field.
pub fn p1_grad(fe: &FeMesh, field: &[f64], t: usize, geom: &TriGeom) -> [f64; 2] {
    let n = &fe.tri_nodes[t];
    let mut g = [0.0; 2];
    for a in 0..3 {
        g[0] += field[n[a]] * geom.grad_l[a][0];
        g[1] += field[n[a]] * geom.grad_l[a][1];
    }
    g
}

/// Engineering strain `[d1 u1, d2 u2, d2 u1 + d1 u2]` of a nodal P2 vector field.
pub fn vec_strain(fe: &FeMesh, field: &[[f64; 2]], t: usize, l: [f64; 3], geom: &TriGeom) -> [f64; 3] {
    let g = p2_grads(l, geom);
    let nodes = &fe.tri_nodes[t];
    let mut e = [0.0; 3];
    for a in 0..6 {
        let u = field[nodes[a]];
        e[0] += u[0] * g[a][0];
        e[1] += u[1] * g[a][1];
        e[2] += u[0] * g[a][1] + u[1] * g[a][0];
    }
    e
}

/// Divergence of a nodal P2 vector field.
pub fn vec_div(fe: &FeMesh, field: &[[f64; 2]], t: usize, l: [f64; 3], geom: &TriGeom) -> f64 {
    let e = vec_strain(fe, field, t, l, geom);
    e[0] + e[1]
}

/// Frobenius square `D : D` of an engineering strain vector.
pub fn strain_norm_sq(e: [f64; 3]) -> f64 {
    e[0] * e[0] + e[1] * e[1] + 0.5 * e[2] * e[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellGeometry;

    #[test]
    fn basic_integrals() {
        let pm = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap().mesh(0.1).unwrap();
        let fe = FeMesh::periodic(&pm);
        assert!((integrate(&fe, None, |_| 1.0) - 2.0).abs() < 1e-12);
        // Closed interface: ∫ ν = 0.
        let nx = integrate_edges(&fe, EdgeTag::Interface, |q| q.normal[0]).unwrap();
        let ny = integrate_edges(&fe, EdgeTag::Interface, |q| q.normal[1]).unwrap();
        assert!(nx.abs() < 1e-12 && ny.abs() < 1e-12);
        // Symmetric cavity: ∫_{Z_f} y2 = 0.
        assert!(integrate(&fe, Some(Phase::Fluid), |q| q.x[1]).abs() < 1e-12);
        // Quadrature exact for degree 4.
        let i4 = integrate(&fe, None, |q| q.x[1].powi(4));
        assert!((i4 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn empty_edge_region() {
        let pm = CellGeometry::solid().mesh(0.5).unwrap();
        let fe = FeMesh::periodic(&pm);
        assert!(integrate_edges(&fe, EdgeTag::Interface, |_| 1.0).is_err());
    }
}
