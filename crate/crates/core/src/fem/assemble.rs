//! Element-loop assembly of bilinear forms and load vectors.
//!
//! Local element matrices are computed independently (in parallel when
//! requested) and scattered in triangle order, so results do not depend on
//! the execution mode.

use super::p2::{p2_grads, p2_values, TriGeom};
use super::quadrature::{GAUSS3, TRI6};
use super::space::{Element, FeMesh, FunctionSpace};
use super::sparse::{CsrMatrix, Triplets};
use crate::error::FemError;
use crate::geometry::{EdgeTag, Phase};
use crate::material::ElasticityTensor;
use crate::par::Exec;

/// Bilinear forms available for assembly.
#[derive(Clone, Copy, Debug)]
pub enum Form<'a> {
    /// `∫ A D(u) : D(v)` on vector spaces.
    Elastic(&'a ElasticityTensor),
    /// `∫ D(u) : D(v)` on vector spaces.
    Viscous,
    /// `∫ c u v` (scalar) or `∫ c u . v` (vector).
    Mass(f64),
    /// `∫ c ∇u . ∇v` on scalar spaces.
    Laplace(f64),
    /// `∫ q div(v)`: rows pressure (P1), columns velocity (P2 vector).
    DivCoupling,
    /// `∫ v . ∇q`: rows velocity (P2 vector), columns pressure (P1).
    GradCoupling,
}

impl Form<'_> {
    fn name(&self) -> &'static str {
        match self {
            Form::Elastic(_) => "elastic",
            Form::Viscous => "viscous",
            Form::Mass(_) => "mass",
            Form::Laplace(_) => "laplace",
            Form::DivCoupling => "div-coupling",
            Form::GradCoupling => "grad-coupling",
        }
    }
}

/// Engineering strain rows of the 12 local vector basis functions at a point:
/// `strain[k] = [d1 u1, d2 u2, d2 u1 + d1 u2]` of basis function `k = 2a + c`.
pub fn strain_basis(grads: &[[f64; 2]; 6]) -> [[f64; 3]; 12] {
    let mut s = [[0.0; 3]; 12];
    for a in 0..6 {
        let g = grads[a];
        s[2 * a] = [g[0], 0.0, g[1]];
        s[2 * a + 1] = [0.0, g[1], g[0]];
    }
    s
}

fn scalar_values(element: Element, l: [f64; 3]) -> Vec<f64> {
    match element {
        Element::P1 => l.to_vec(),
        _ => p2_values(l).to_vec(),
    }
}

fn scalar_grads(element: Element, l: [f64; 3], g: &TriGeom) -> Vec<[f64; 2]> {
    match element {
        Element::P1 => g.grad_l.to_vec(),
        _ => p2_grads(l, g).to_vec(),
    }
}

fn local_matrix(form: &Form, row: &FunctionSpace, col: &FunctionSpace, g: &TriGeom) -> Vec<f64> {
    let (nr, nc) = (row.local_size(), col.local_size());
    let mut m = vec![0.0; nr * nc];
    for (l, w) in TRI6 {
        let w = w * g.area;
        match form {
            Form::Elastic(_) | Form::Viscous => {
                let s = strain_basis(&p2_grads(l, g));
                let c = match form {
                    Form::Elastic(a) => *a.voigt(),
                    _ => *ElasticityTensor::identity().voigt(),
                };
                for i in 0..12 {
                    let si = s[i];
                    let cs = [
                        c[0][0] * si[0] + c[0][1] * si[1] + c[0][2] * si[2],
                        c[1][0] * si[0] + c[1][1] * si[1] + c[1][2] * si[2],
                        c[2][0] * si[0] + c[2][1] * si[1] + c[2][2] * si[2],
                    ];
                    for j in 0..12 {
                        let sj = s[j];
                        m[i * 12 + j] += w * (cs[0] * sj[0] + cs[1] * sj[1] + cs[2] * sj[2]);
                    }
                }
            }
            Form::Mass(c) => {
                let vr = scalar_values(row.element, l);
                let vc = scalar_values(col.element, l);
                if row.element == Element::P2Vec {
                    for a in 0..6 {
                        for b in 0..6 {
                            let v = w * c * vr[a] * vc[b];
                            m[(2 * a) * 12 + 2 * b] += v;
                            m[(2 * a + 1) * 12 + 2 * b + 1] += v;
                        }
                    }
                } else {
                    for a in 0..nr {
                        for b in 0..nc {
                            m[a * nc + b] += w * c * vr[a] * vc[b];
                        }
                    }
                }
            }
            Form::Laplace(c) => {
                let gr = scalar_grads(row.element, l, g);
                let gc = scalar_grads(col.element, l, g);
                for a in 0..nr {
                    for b in 0..nc {
                        m[a * nc + b] += w * c * (gr[a][0] * gc[b][0] + gr[a][1] * gc[b][1]);
                    }
                }
            }
            Form::DivCoupling => {
                let q = scalar_values(row.element, l);
                let gv = p2_grads(l, g);
                for a in 0..nr {
                    for b in 0..6 {
                        m[a * nc + 2 * b] += w * q[a] * gv[b][0];
                        m[a * nc + 2 * b + 1] += w * q[a] * gv[b][1];
                    }
                }
            }
            Form::GradCoupling => {
                let v = p2_values(l);
                let gq = scalar_grads(col.element, l, g);
                for a in 0..6 {
                    for b in 0..nc {
                        m[(2 * a) * nc + b] += w * v[a] * gq[b][0];
                        m[(2 * a + 1) * nc + b] += w * v[a] * gq[b][1];
                    }
                }
            }
        }
    }
    m
}

fn check_compat(form: &Form, row: &FunctionSpace, col: &FunctionSpace) -> Result<(), FemError> {
    let vec_r = row.element == Element::P2Vec;
    let vec_c = col.element == Element::P2Vec;
    let ok = match form {
        Form::Elastic(_) | Form::Viscous => vec_r && vec_c,
        Form::Mass(_) => vec_r == vec_c,
        Form::Laplace(_) => !vec_r && !vec_c,
        Form::DivCoupling => !vec_r && vec_c,
        Form::GradCoupling => vec_r && !vec_c,
    };
    if ok {
        Ok(())
    } else {
        let space = if vec_r == vec_c { row.element.name().to_string() } else { format!("{}/{}", row.element.name(), col.element.name()) };
        Err(FemError::IncompatibleSpaceForm { form: form.name().to_string(), space })
    }
}

/// Assembles `form` over the triangles of `domain` with test space `row` and
/// trial space `col`. Fixed (eliminated) DOFs are dropped.
pub fn assemble_bilinear(
    fe: &FeMesh,
    form: Form,
    domain: Option<Phase>,
    row: &FunctionSpace,
    col: &FunctionSpace,
    exec: Exec,
) -> Result<CsrMatrix, FemError> {
    check_compat(&form, row, col)?;
    let tris = fe.triangles_in(domain);
    let locals = exec.map(&tris, |&t| local_matrix(&form, row, col, &fe.geom(t)));
    let mut trip = Triplets::new(row.n_dofs(), col.n_dofs());
    let nc = col.local_size();
    for (&t, m) in tris.iter().zip(&locals) {
        let rd = row.local_dofs(fe, t);
        let cd = col.local_dofs(fe, t);
        for (a, ra) in rd.iter().enumerate() {
            let Some(i) = ra else { continue };
            for (b, cb) in cd.iter().enumerate() {
                if let Some(j) = cb {
                    trip.push(*i, *j, m[a * nc + b]);
                }
            }
        }
    }
    Ok(trip.to_csr())
}

/// Quadrature point data passed to load integrands.
#[derive(Clone, Copy, Debug)]
pub struct LoadPoint {
    pub t: usize,
    pub x: [f64; 2],
}

fn scatter(out: &mut [f64], dofs: &[Option<usize>], local: &[f64]) {
    for (d, v) in dofs.iter().zip(local) {
        if let Some(i) = d {
            out[*i] += v;
        }
    }
}

/// `∫ f . v` over `domain` for a vector space.
pub fn load_body<F>(fe: &FeMesh, space: &FunctionSpace, domain: Option<Phase>, exec: Exec, f: F) -> Vec<f64>
where
    F: Fn(LoadPoint) -> [f64; 2] + Sync + Send,
{
    assert_eq!(space.element, Element::P2Vec);
    let tris = fe.triangles_in(domain);
    let locals = exec.map(&tris, |&t| {
        let g = fe.geom(t);
        let mut loc = vec![0.0; 12];
        for (l, w) in TRI6 {
            let x = g.point(l);
            let fx = f(LoadPoint { t, x });
            let v = p2_values(l);
            for a in 0..6 {
                loc[2 * a] += w * g.area * fx[0] * v[a];
                loc[2 * a + 1] += w * g.area * fx[1] * v[a];
            }
        }
        loc
    });
    let mut out = vec![0.0; space.n_dofs()];
    for (&t, loc) in tris.iter().zip(&locals) {
        scatter(&mut out, &space.local_dofs(fe, t), loc);
    }
    out
}

/// `∫ f q` over `domain` for a scalar space.
pub fn load_scalar<F>(fe: &FeMesh, space: &FunctionSpace, domain: Option<Phase>, f: F) -> Vec<f64>
where
    F: Fn(LoadPoint) -> f64,
{
    assert_ne!(space.element, Element::P2Vec);
    let mut out = vec![0.0; space.n_dofs()];
    for t in fe.triangles_in(domain) {
        let g = fe.geom(t);
        let mut loc = vec![0.0; space.local_size()];
        for (l, w) in TRI6 {
            let fx = f(LoadPoint { t, x: g.point(l) });
            for (a, v) in scalar_values(space.element, l).iter().enumerate() {
                loc[a] += w * g.area * fx * v;
            }
        }
        scatter(&mut out, &space.local_dofs(fe, t), &loc);
    }
    out
}

/// `∫ s : D(v)` over `domain`, with `s` a Voigt stress `[s11, s22, s12]`.
pub fn load_strain<F>(fe: &FeMesh, space: &FunctionSpace, domain: Option<Phase>, s: F) -> Vec<f64>
where
    F: Fn(LoadPoint) -> [f64; 3],
{
    assert_eq!(space.element, Element::P2Vec);
    let mut out = vec![0.0; space.n_dofs()];
    for t in fe.triangles_in(domain) {
        let g = fe.geom(t);
        let mut loc = vec![0.0; 12];
        for (l, w) in TRI6 {
            let sx = s(LoadPoint { t, x: g.point(l) });
            let sb = strain_basis(&p2_grads(l, &g));
            for k in 0..12 {
                loc[k] += w * g.area * (sx[0] * sb[k][0] + sx[1] * sb[k][1] + sx[2] * sb[k][2]);
            }
        }
        scatter(&mut out, &space.local_dofs(fe, t), &loc);
    }
    out
}

/// Barycentric coordinates of the point at parameter `s` along local edge `k`.
pub(crate) fn edge_bary(tri: [usize; 3], e: [usize; 2], s: f64) -> [f64; 3] {
    let mut l = [0.0; 3];
    let ia = tri.iter().position(|&v| v == e[0]).expect("edge vertex");
    let ib = tri.iter().position(|&v| v == e[1]).expect("edge vertex");
    l[ia] = 1.0 - s;
    l[ib] = s;
    l
}

/// `∫_E g(x, n) . v` over the edges with the given tag, where `n` is the
/// outward normal of the edge's recorded triangle (solid side for interfaces).
pub fn load_edges<F>(fe: &FeMesh, space: &FunctionSpace, tag: EdgeTag, g: F) -> Vec<f64>
where
    F: Fn([f64; 2], [f64; 2]) -> [f64; 2],
{
    assert_eq!(space.element, Element::P2Vec);
    let mut out = vec![0.0; space.n_dofs()];
    for e in fe.mesh.edges_with_tag(tag) {
        let (n, len) = fe.mesh.edge_normal(e);
        let tri = fe.mesh.triangles[e.triangle];
        let geom = fe.geom(e.triangle);
        let mut loc = vec![0.0; 12];
        for (s, w) in GAUSS3 {
            let l = edge_bary(tri, e.nodes, s);
            let x = geom.point(l);
            let gx = g(x, n);
            let v = p2_values(l);
            for a in 0..6 {
                loc[2 * a] += w * len * gx[0] * v[a];
                loc[2 * a + 1] += w * len * gx[1] * v[a];
            }
        }
        scatter(&mut out, &space.local_dofs(fe, e.triangle), &loc);
    }
    out
}

/// Rows of mean-value constraints `∫_{component} v_c = 0`, one per
/// (component label, vector direction). `labels[t]` selects the triangles.
pub fn mean_value_rows(fe: &FeMesh, space: &FunctionSpace, labels: &[Option<usize>], n_labels: usize) -> Vec<Vec<f64>> {
    let dirs = space.components();
    let mut rows = vec![vec![0.0; space.n_dofs()]; n_labels * dirs];
    for (t, lab) in labels.iter().enumerate() {
        let Some(k) = lab else { continue };
        let g = fe.geom(t);
        let mut integ = vec![0.0; space.local_size() / dirs];
        for (l, w) in TRI6 {
            for (a, v) in scalar_values(space.element, l).iter().enumerate().take(integ.len()) {
                integ[a] += w * g.area * v;
            }
        }
        let dofs = space.local_dofs(fe, t);
        for (a, val) in integ.iter().enumerate() {
            for c in 0..dirs {
                if let Some(d) = dofs[a * dirs + c] {
                    rows[k * dirs + c][d] += val;
                }
            }
        }
    }
    rows
}
