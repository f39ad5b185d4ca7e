//! Triangle meshes with subdomain tags, tagged boundary edges and periodic
//! identification across the lateral sides of the reference cell.

use super::{CellGeometry, FluidRegion};
use crate::error::GeometryError;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};
use std::collections::HashMap;

/// Subdomain of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Fluid,
    Solid,
}

impl Phase {
    pub fn code(self) -> u8 {
        match self {
            Phase::Solid => 0,
            Phase::Fluid => 1,
        }
    }
}

/// Tag attached to a boundary (or interface) edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    /// Fluid/solid interface.
    Interface,
    /// Upper face `y2 = +1` (or `x2 = +eps` on a layer).
    Top,
    /// Lower face.
    Bottom,
    /// Lateral side of a reference cell (periodically identified).
    Lateral,
    /// Clamped lateral solid boundary of a layer.
    SolidClamped,
    /// Lateral fluid boundary of a layer with prescribed velocity.
    FluidDirichlet,
    /// Lateral fluid boundary of a layer with natural (traction-free) condition.
    FluidNeumann,
}

impl EdgeTag {
    pub fn code(self) -> u8 {
        match self {
            EdgeTag::Interface => 0,
            EdgeTag::Top => 1,
            EdgeTag::Bottom => 2,
            EdgeTag::Lateral => 3,
            EdgeTag::SolidClamped => 4,
            EdgeTag::FluidDirichlet => 5,
            EdgeTag::FluidNeumann => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeTag::Interface => "interface",
            EdgeTag::Top => "top",
            EdgeTag::Bottom => "bottom",
            EdgeTag::Lateral => "lateral",
            EdgeTag::SolidClamped => "solid_clamped",
            EdgeTag::FluidDirichlet => "fluid_dirichlet",
            EdgeTag::FluidNeumann => "fluid_neumann",
        }
    }
}

/// A tagged edge. For interface edges `triangle` is the solid-side triangle,
/// otherwise the unique adjacent triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedEdge {
    pub nodes: [usize; 2],
    pub tag: EdgeTag,
    pub triangle: usize,
}

/// Conforming triangle mesh with counter-clockwise triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub phases: Vec<Phase>,
    pub boundary_edges: Vec<TaggedEdge>,
}

impl TriMesh {
    /// Builds a mesh and tags its boundary edges. `tag_boundary` receives the
    /// edge midpoint and the adjacent triangle's phase; edges between fluid
    /// and solid triangles are tagged as interface automatically.
    pub fn new<F>(
        nodes: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        phases: Vec<Phase>,
        tag_boundary: F,
    ) -> Result<Self, GeometryError>
    where
        F: Fn([f64; 2], Phase) -> Option<EdgeTag>,
    {
        if triangles.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        for t in triangles.iter_mut() {
            let a = signed_area(&nodes, *t);
            if a < 0.0 {
                t.swap(1, 2);
            }
            if a.abs() <= 1e-14 {
                return Err(GeometryError::MeshingFailed(format!("degenerate triangle {t:?}")));
            }
        }
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_tris.entry((a.min(b), a.max(b))).or_default().push(ti);
            }
        }
        let mut keys: Vec<_> = edge_tris.keys().copied().collect();
        keys.sort_unstable();
        let mut boundary_edges = Vec::new();
        for key in keys {
            let tris = &edge_tris[&key];
            let mid = [
                0.5 * (nodes[key.0][0] + nodes[key.1][0]),
                0.5 * (nodes[key.0][1] + nodes[key.1][1]),
            ];
            match tris.as_slice() {
                [t] => {
                    let tag = tag_boundary(mid, phases[*t])
                        .ok_or(GeometryError::UntaggedEdge(key.0, key.1))?;
                    boundary_edges.push(TaggedEdge { nodes: [key.0, key.1], tag, triangle: *t });
                }
                [t0, t1] => {
                    if phases[*t0] != phases[*t1] {
                        let solid = if phases[*t0] == Phase::Solid { *t0 } else { *t1 };
                        boundary_edges.push(TaggedEdge {
                            nodes: [key.0, key.1],
                            tag: EdgeTag::Interface,
                            triangle: solid,
                        });
                    }
                }
                _ => {
                    return Err(GeometryError::MeshingFailed(format!(
                        "edge {key:?} shared by {} triangles",
                        tris.len()
                    )))
                }
            }
        }
        Ok(Self { nodes, triangles, phases, boundary_edges })
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[t])
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Total area of triangles of the given phase (`None` for all).
    pub fn phase_area(&self, phase: Option<Phase>) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| phase.map_or(true, |p| self.phases[t] == p))
            .map(|t| self.area(t))
            .sum()
    }

    /// Exact integral of `x2` over triangles of the given phase.
    pub fn phase_moment(&self, phase: Phase) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.phases[t] == phase)
            .map(|t| self.area(t) * self.centroid(t)[1])
            .sum()
    }

    pub fn edges_with_tag(&self, tag: EdgeTag) -> impl Iterator<Item = &TaggedEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Outward unit normal of the edge with respect to its recorded triangle
    /// (for interface edges: the solid's outward normal), and the edge length.
    pub fn edge_normal(&self, e: &TaggedEdge) -> ([f64; 2], f64) {
        let p = self.nodes[e.nodes[0]];
        let q = self.nodes[e.nodes[1]];
        let t = self.triangles[e.triangle];
        let other = *t.iter().find(|&&v| v != e.nodes[0] && v != e.nodes[1]).expect("edge in triangle");
        let r = self.nodes[other];
        let d = [q[0] - p[0], q[1] - p[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let mut n = [d[1] / len, -d[0] / len];
        let to_other = [r[0] - p[0], r[1] - p[1]];
        if n[0] * to_other[0] + n[1] * to_other[1] > 0.0 {
            n = [-n[0], -n[1]];
        }
        (n, len)
    }

    /// Connected components of the triangles of `phase` under edge adjacency,
    /// where node indices are first mapped through `rep` (periodic identification).
    /// Returns per-triangle labels and the component count.
    pub fn components(&self, phase: Phase, rep: &[usize]) -> (Vec<Option<usize>>, usize) {
        let nt = self.triangles.len();
        let mut parent: Vec<usize> = (0..nt).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut first: HashMap<(usize, usize), usize> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            if self.phases[ti] != phase {
                continue;
            }
            for k in 0..3 {
                let (a, b) = (rep[t[k]], rep[t[(k + 1) % 3]]);
                let key = (a.min(b), a.max(b));
                if let Some(&other) = first.get(&key) {
                    let (ra, rb) = (find(&mut parent, ti), find(&mut parent, other));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                } else {
                    first.insert(key, ti);
                }
            }
        }
        let mut labels = vec![None; nt];
        let mut roots: HashMap<usize, usize> = HashMap::new();
        for ti in 0..nt {
            if self.phases[ti] != phase {
                continue;
            }
            let r = find(&mut parent, ti);
            let next = roots.len();
            labels[ti] = Some(*roots.entry(r).or_insert(next));
        }
        (labels, roots.len())
    }

    /// JSON export `{nodes, triangles:[[i,j,k,tag]], periodic_pairs, boundary_edges:[[i,j,tag]]}`.
    /// Triangle tags: 0 solid, 1 fluid. Edge tags follow [`EdgeTag::code`].
    pub fn to_json(&self, periodic_pairs: &[[usize; 2]]) -> Value {
        json!({
            "nodes": self.nodes,
            "triangles": self.triangles.iter().zip(&self.phases)
                .map(|(t, p)| [t[0], t[1], t[2], p.code() as usize]).collect::<Vec<_>>(),
            "periodic_pairs": periodic_pairs,
            "boundary_edges": self.boundary_edges.iter()
                .map(|e| [e.nodes[0], e.nodes[1], e.tag.code() as usize]).collect::<Vec<_>>(),
            "triangle_tags": {"0": "solid", "1": "fluid"},
            "edge_tags": {"0": "interface", "1": "top", "2": "bottom", "3": "lateral",
                          "4": "solid_clamped", "5": "fluid_dirichlet", "6": "fluid_neumann"},
        })
    }
}

pub(crate) fn signed_area(nodes: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let (p, q, r) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

/// Mesh of the reference cell with periodic pairing of lateral nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMesh {
    pub mesh: TriMesh,
    /// `[master, slave]` pairs: master on `y1 = 0`, slave on `y1 = 1`.
    pub periodic_pairs: Vec<[usize; 2]>,
    /// Representative node of each node (master for slaves, itself otherwise).
    pub rep: Vec<usize>,
    /// Connected-component label of each solid triangle.
    pub solid_components: Vec<Option<usize>>,
    pub n_solid_components: usize,
    /// Connected-component label of each fluid triangle.
    pub fluid_components: Vec<Option<usize>>,
    pub n_fluid_components: usize,
    /// Target mesh size used for generation.
    pub h: f64,
}

impl PeriodicMesh {
    fn from_mesh(mesh: TriMesh, h: f64) -> Result<Self, GeometryError> {
        let mut left: Vec<(f64, usize)> = Vec::new();
        let mut right: Vec<(f64, usize)> = Vec::new();
        for (i, p) in mesh.nodes.iter().enumerate() {
            if p[0].abs() < 1e-12 {
                left.push((p[1], i));
            } else if (p[0] - 1.0).abs() < 1e-12 {
                right.push((p[1], i));
            }
        }
        left.sort_by(|a, b| a.0.total_cmp(&b.0));
        right.sort_by(|a, b| a.0.total_cmp(&b.0));
        if left.len() != right.len() {
            return Err(GeometryError::MeshingFailed(format!(
                "lateral node counts differ: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        let mut rep: Vec<usize> = (0..mesh.nodes.len()).collect();
        let mut periodic_pairs = Vec::with_capacity(left.len());
        for (l, r) in left.iter().zip(&right) {
            if (l.0 - r.0).abs() > 1e-12 {
                return Err(GeometryError::MeshingFailed(format!(
                    "lateral nodes do not match: y = {} vs {}",
                    l.0, r.0
                )));
            }
            periodic_pairs.push([l.1, r.1]);
            rep[r.1] = l.1;
        }
        let (solid_components, n_solid_components) = mesh.components(Phase::Solid, &rep);
        let (fluid_components, n_fluid_components) = mesh.components(Phase::Fluid, &rep);
        Ok(Self {
            mesh,
            periodic_pairs,
            rep,
            solid_components,
            n_solid_components,
            fluid_components,
            n_fluid_components,
            h,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.mesh.to_json(&self.periodic_pairs);
        v["h"] = json!(self.h);
        v
    }

    /// SHA-256 of the canonical JSON export (hex).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_json()).expect("mesh serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn cell_boundary_tag(mid: [f64; 2], _phase: Phase) -> Option<EdgeTag> {
    if (mid[1] - 1.0).abs() < 1e-12 {
        Some(EdgeTag::Top)
    } else if (mid[1] + 1.0).abs() < 1e-12 {
        Some(EdgeTag::Bottom)
    } else if mid[0].abs() < 1e-12 || (mid[0] - 1.0).abs() < 1e-12 {
        Some(EdgeTag::Lateral)
    } else {
        None
    }
}

pub(crate) fn generate_periodic_cell_mesh(geom: &CellGeometry, h: f64) -> Result<PeriodicMesh, GeometryError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GeometryError::InvalidParameters(format!("mesh size h = {h}")));
    }
    if h > 1.0 {
        return Err(GeometryError::MeshingFailed(format!("mesh size h = {h} exceeds the cell width")));
    }
    let mesh = match geom.fluid {
        FluidRegion::Cavity { center, radius } => cavity_mesh(center, radius, h)?,
        FluidRegion::Channel { lower, upper } => structured_mesh(h, &[lower, upper], |y| y > lower && y < upper)?,
        FluidRegion::Solid => structured_mesh(h, &[], |_| false)?,
    };
    PeriodicMesh::from_mesh(mesh, h)
}

/// Splits `[lo, hi]` into uniform segments of length at most `h`.
fn levels(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = (((hi - lo) / h) - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
}

/// Structured mesh aligned with the given horizontal break lines; the
/// diagonal direction is mirrored across `y2 = 0` so that symmetric break
/// sets produce mirror-symmetric meshes.
fn structured_mesh<F: Fn(f64) -> bool>(h: f64, breaks: &[f64], is_fluid: F) -> Result<TriMesh, GeometryError> {
    let mut cuts: Vec<f64> = vec![-1.0, 1.0, 0.0];
    cuts.extend_from_slice(breaks);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut ys: Vec<f64> = vec![-1.0];
    for w in cuts.windows(2) {
        let seg = levels(w[0], w[1], h);
        ys.extend_from_slice(&seg[1..]);
    }
    let xs = levels(0.0, 1.0, h);
    let (nx, ny) = (xs.len(), ys.len());
    let mut nodes = Vec::with_capacity(nx * ny);
    for &y in &ys {
        for &x in &xs {
            nodes.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut triangles = Vec::new();
    let mut phases = Vec::new();
    for j in 0..ny - 1 {
        let yc = 0.5 * (ys[j] + ys[j + 1]);
        let phase = if is_fluid(yc) { Phase::Fluid } else { Phase::Solid };
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if yc >= 0.0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
            phases.push(phase);
            phases.push(phase);
        }
    }
    TriMesh::new(nodes, triangles, phases, cell_boundary_tag)
}

/// Constrained Delaunay mesh of the cell with a polygonal disk inclusion.
/// Centered inclusions (`c2 = 0`) are meshed on the upper half and mirrored,
/// which makes the mesh exactly symmetric in `y2`.
fn cavity_mesh(center: [f64; 2], radius: f64, h: f64) -> Result<TriMesh, GeometryError> {
    let xs = levels(0.0, 1.0, h);
    let n_theta = {
        let n = (2.0 * std::f64::consts::PI * radius / h).ceil().max(12.0) as usize;
        n.div_ceil(4) * 4
    };
    let symmetric = center[1] == 0.0;
    let (y_lo, ys) = if symmetric {
        (0.0, levels(0.0, 1.0, h))
    } else {
        let mut ys = levels(-1.0, 0.0, h);
        ys.extend_from_slice(&levels(0.0, 1.0, h)[1..]);
        (-1.0, ys)
    };
    let seg = 2.0 * radius * (std::f64::consts::PI / n_theta as f64).sin();
    let keep_off = 0.5 * h.max(seg);
    let circle_pt = |k: usize| {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
        let y = if k % (n_theta / 2) == 0 { center[1] } else { center[1] + radius * th.sin() };
        [center[0] + radius * th.cos(), y]
    };

    let mut pts: Vec<[f64; 2]> = Vec::new();
    // Outer boundary of the (half) cell.
    for &x in &xs {
        pts.push([x, y_lo]);
        pts.push([x, 1.0]);
    }
    for &y in &ys[1..ys.len() - 1] {
        pts.push([0.0, y]);
        pts.push([1.0, y]);
    }
    // Interface polygon.
    let arc: Vec<usize> = if symmetric { (0..=n_theta / 2).collect() } else { (0..n_theta).collect() };
    for &k in &arc {
        pts.push(circle_pt(k));
    }
    // Interior background points away from the interface.
    for &y in &ys[1..ys.len() - 1] {
        for &x in &xs[1..xs.len() - 1] {
            let d = ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt();
            if (d - radius).abs() >= keep_off {
                pts.push([x, y]);
            }
        }
    }
    if symmetric {
        // Drop bottom-line points too close to the arc endpoints.
        pts.retain(|p| {
            !(p[1] == 0.0 && ((p[0] - center[0]).abs() - radius).abs() < keep_off && ((p[0] - center[0]).abs() - radius).abs() > 1e-12)
        });
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(pts.len());
    for p in &pts {
        let hdl = cdt
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| GeometryError::MeshingFailed(format!("point insertion failed: {e:?}")))?;
        handles.push(hdl);
    }
    let circle_handles: Vec<_> = {
        // Recover handles for the interface polygon after the retain above.
        let mut out = Vec::new();
        for &k in &arc {
            let p = circle_pt(k);
            let idx = pts
                .iter()
                .position(|q| q[0] == p[0] && q[1] == p[1])
                .ok_or_else(|| GeometryError::MeshingFailed("interface vertex lost".into()))?;
            out.push(handles[idx]);
        }
        out
    };
    let n_arc = circle_handles.len();
    let n_seg = if symmetric { n_arc - 1 } else { n_arc };
    for k in 0..n_seg {
        let (a, b) = (circle_handles[k], circle_handles[(k + 1) % n_arc]);
        if a != b {
            cdt.add_constraint(a, b);
        }
    }

    let nodes: Vec<[f64; 2]> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let apothem = radius * (std::f64::consts::PI / n_theta as f64).cos();
    let inside = |p: [f64; 2]| {
        (0..n_theta).all(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_theta as f64;
            (p[0] - center[0]) * th.cos() + (p[1] - center[1]) * th.sin() < apothem
        })
    };
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for f in cdt.inner_faces() {
        let v = f.vertices();
        triangles.push([v[0].fix().index(), v[1].fix().index(), v[2].fix().index()]);
    }
    triangles.sort_unstable();

    let (nodes, triangles) = if symmetric {
        let mut all = nodes.clone();
        let mut mirror = vec![0usize; nodes.len()];
        for (i, p) in nodes.iter().enumerate() {
            if p[1] == 0.0 {
                mirror[i] = i;
            } else {
                mirror[i] = all.len();
                all.push([p[0], -p[1]]);
            }
        }
        let mut tris = triangles.clone();
        for t in &triangles {
            tris.push([mirror[t[0]], mirror[t[2]], mirror[t[1]]]);
        }
        (all, tris)
    } else {
        (nodes, triangles)
    };
    let phases: Vec<Phase> = triangles
        .iter()
        .map(|t| {
            let c = [
                (nodes[t[0]][0] + nodes[t[1]][0] + nodes[t[2]][0]) / 3.0,
                (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0,
            ];
            if inside(c) {
                Phase::Fluid
            } else {
                Phase::Solid
            }
        })
        .collect();
    TriMesh::new(nodes, triangles, phases, cell_boundary_tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(pm: &PeriodicMesh) {
        let m = &pm.mesh;
        let total: f64 = m.phase_area(None);
        assert!((total - 2.0).abs() < 1e-10, "area {total}");
        assert!((m.phase_area(Some(Phase::Fluid)) + m.phase_area(Some(Phase::Solid)) - 2.0).abs() < 1e-10);
        for t in 0..m.triangles.len() {
            assert!(m.area(t) > 0.0);
        }
        for [a, b] in &pm.periodic_pairs {
            let (p, q) = (m.nodes[*a], m.nodes[*b]);
            assert!((p[0] + 1.0 - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
        for e in m.edges_with_tag(EdgeTag::Interface) {
            assert_eq!(m.phases[e.triangle], Phase::Solid);
        }
    }

    #[test]
    fn cavity_mesh_is_valid() {
        let g = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap();
        let pm = g.mesh(0.1).unwrap();
        check_invariants(&pm);
        // Interface edges form one closed polygon: every vertex has degree 2.
        let mut deg: HashMap<usize, usize> = HashMap::new();
        let mut count = 0;
        for e in pm.mesh.edges_with_tag(EdgeTag::Interface) {
            *deg.entry(e.nodes[0]).or_default() += 1;
            *deg.entry(e.nodes[1]).or_default() += 1;
            count += 1;
        }
        assert_eq!(deg.len(), count);
        assert!(deg.values().all(|&d| d == 2));
        assert_eq!(pm.n_solid_components, 1);
        assert_eq!(pm.n_fluid_components, 1);
        // No fluid touches the lateral boundary.
        for e in pm.mesh.edges_with_tag(EdgeTag::Lateral) {
            assert_eq!(pm.mesh.phases[e.triangle], Phase::Solid);
        }
    }

    #[test]
    fn centered_cavity_mesh_is_mirror_symmetric() {
        let g = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap();
        let m = g.mesh(0.1).unwrap().mesh;
        let d = m.phase_moment(Phase::Fluid);
        assert!(d.abs() < 1e-14, "fluid moment {d}");
    }

    #[test]
    fn offset_cavity_mesh_is_valid() {
        let g = CellGeometry::cavity([0.4, 0.2], 0.25).unwrap();
        let pm = g.mesh(0.08).unwrap();
        check_invariants(&pm);
        let a = pm.mesh.phase_area(Some(Phase::Fluid));
        assert!((a - g.fluid_area()).abs() / g.fluid_area() < 0.02);
    }

    #[test]
    fn channel_mesh_topology() {
        let g = CellGeometry::channel(-0.3, 0.3).unwrap();
        let pm = g.mesh(0.1).unwrap();
        check_invariants(&pm);
        assert!((pm.mesh.phase_area(Some(Phase::Fluid)) - 0.6).abs() < 1e-12);
        assert_eq!(pm.n_solid_components, 2);
        assert_eq!(pm.n_fluid_components, 1);
        // Two interface polylines each spanning y1 in [0, 1].
        let len: f64 = pm
            .mesh
            .edges_with_tag(EdgeTag::Interface)
            .map(|e| pm.mesh.edge_normal(e).1)
            .sum();
        assert!((len - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_mesh_size() {
        let g = CellGeometry::solid();
        assert!(g.mesh(0.0).is_err());
        assert!(g.mesh(-1.0).is_err());
    }

    #[test]
    fn interface_normals_point_into_fluid() {
        let g = CellGeometry::cavity([0.5, 0.1], 0.3).unwrap();
        let pm = g.mesh(0.1).unwrap();
        let m = &pm.mesh;
        let mut sum = [0.0, 0.0];
        for e in m.edges_with_tag(EdgeTag::Interface) {
            let (n, len) = m.edge_normal(e);
            let mid = [
                0.5 * (m.nodes[e.nodes[0]][0] + m.nodes[e.nodes[1]][0]),
                0.5 * (m.nodes[e.nodes[0]][1] + m.nodes[e.nodes[1]][1]),
            ];
            // Solid outward normal points toward the disk center.
            assert!(n[0] * (0.5 - mid[0]) + n[1] * (0.1 - mid[1]) > 0.0);
            sum[0] += n[0] * len;
            sum[1] += n[1] * len;
        }
        assert!(sum[0].abs() < 1e-12 && sum[1].abs() < 1e-12);
    }
}
