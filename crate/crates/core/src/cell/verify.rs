//! Closed-form identities satisfied by the cell solutions on every geometry.
//!
//! The correctors for the index pairs involving the transverse direction are
//! polynomials in `y2`, so the P2 solutions must reproduce them to round-off.

use super::CellSolutionSet;
use crate::fem::integrate::{integrate, p1_value, vec_value};
use crate::geometry::Phase;

/// Outcome of one analytic check.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Per-component means of `f` over triangles labelled in `labels`.
fn component_means(set: &CellSolutionSet, labels: &[Option<usize>], n: usize, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    crate::fem::integrate::for_each_qp(&set.fe, None, |q| {
        if let Some(k) = labels[q.t] {
            num[k] += q.w * f(q.x);
            den[k] += q.w;
        }
    });
    num.iter().zip(&den).map(|(a, b)| a / b).collect()
}

/// Checks every closed-form identity available for this cell:
///
/// * `chi_i2 = -(y2 e_i - mean)` and `chiB_i2 = y2^2/2 e_i - mean` on each
///   solid component (`i = 1, 2`),
/// * `q_2 = 0` and `pi_2 = y2 - mean` on each fluid component.
///
/// Errors are `L2` norms over the relevant phase.
pub fn verify_analytic_cells(set: &CellSolutionSet, tol: f64) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<IdentityCheck>, name: String, err: f64| {
        out.push(IdentityCheck { name, error: err, tol, pass: err <= tol });
    };
    let fe = &set.fe;
    let sl = &set.solid_components;
    let m1 = component_means(set, sl, set.n_solid_components, |x| x[1]);
    let m2 = component_means(set, sl, set.n_solid_components, |x| 0.5 * x[1] * x[1]);
    for i in 0..2 {
        let err = integrate(fe, Some(Phase::Solid), |q| {
            let k = sl[q.t].unwrap_or(0);
            let v = vec_value(fe, &set.chi[i][1], q.t, q.l);
            let mut e = [0.0; 2];
            e[i] = -(q.x[1] - m1[k]);
            (v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2)
        })
        .sqrt();
        push(&mut out, format!("chi_{}2", i + 1), err);
        let err = integrate(fe, Some(Phase::Solid), |q| {
            let k = sl[q.t].unwrap_or(0);
            let v = vec_value(fe, &set.chi_b[i][1], q.t, q.l);
            let mut e = [0.0; 2];
            e[i] = 0.5 * q.x[1] * q.x[1] - m2[k];
            (v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2)
        })
        .sqrt();
        push(&mut out, format!("chiB_{}2", i + 1), err);
    }
    if set.has_fluid() {
        let fl = &set.fluid_components;
        let mf = component_means(set, fl, set.n_fluid_components, |x| x[1]);
        let err = integrate(fe, Some(Phase::Fluid), |q| {
            let v = vec_value(fe, &set.q[1], q.t, q.l);
            v[0] * v[0] + v[1] * v[1]
        })
        .sqrt();
        push(&mut out, "q_2".into(), err);
        let err = integrate(fe, Some(Phase::Fluid), |q| {
            let k = fl[q.t].unwrap_or(0);
            (p1_value(fe, &set.pi[1], q.t, q.l) - (q.x[1] - mf[k])).powi(2)
        })
        .sqrt();
        push(&mut out, "pi_2".into(), err);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::solve_cells;
    use crate::geometry::CellGeometry;
    use crate::{ElasticityTensor, Exec};

    #[test]
    fn identities_hold_on_all_families() {
        let a = ElasticityTensor::isotropic(2.0, 1.0).unwrap();
        for g in [
            CellGeometry::solid(),
            CellGeometry::channel(-0.3, 0.3).unwrap(),
            CellGeometry::cavity([0.5, 0.0], 0.3).unwrap(),
        ] {
            let pm = g.mesh(0.2).unwrap();
            let set = solve_cells(&pm, &a, Exec::Sequential, 1e-10).unwrap();
            for c in verify_analytic_cells(&set, 1e-8) {
                assert!(c.pass, "{} {:?}", g.describe(), c);
            }
        }
    }
}
