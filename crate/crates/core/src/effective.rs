//! Effective plate and Darcy coefficients computed from the cell solutions.

use crate::cell::CellSolutionSet;
use crate::error::{CheckError, Error};
use crate::fem::integrate::{integrate, integrate_edges, vec_strain, vec_value};
use crate::geometry::{CellGeometry, EdgeTag, PeriodicMesh, Phase};
use crate::material::{unit_strain, ElasticityTensor};
use serde::{Deserialize, Serialize};

/// Tolerance of the interface/volume duality identities.
pub const DUALITY_TOL: f64 = 1e-7;

/// Where a coefficient set came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub geometry: serde_json::Value,
    pub h: f64,
    #[serde(rename = "A")]
    pub a: [[f64; 3]; 3],
    pub mesh_hash: String,
}

/// The elastic plate coefficients with the `1/|Z_s|` normalization applied,
/// kept for comparison with that convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidAveragedElastic {
    pub a_star: f64,
    pub b_star: f64,
    pub c_star: f64,
}

/// Homogenized coefficients of the plate/Darcy system (`n = 2`, so every
/// tensor over in-plane indices reduces to a scalar).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoefficients {
    pub a_star: f64,
    pub b_star: f64,
    pub c_star: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub alpha_h: f64,
    /// In-plane permeability `K_11`.
    #[serde(rename = "K")]
    pub k: f64,
    pub d_n_f: f64,
    pub d_n_s: f64,
    pub vol_f: f64,
    pub vol_s: f64,
    pub provenance: Provenance,
    /// Full `2 x 2` permeability including the transverse entries.
    #[serde(default)]
    pub k_full: [[f64; 2]; 2],
    /// Elastic coefficients in the solid-averaged normalization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solid_averaged: Option<SolidAveragedElastic>,
}

/// Volumes and first `y2`-moments of the two phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub vol_f: f64,
    pub vol_s: f64,
    pub d_n_f: f64,
    pub d_n_s: f64,
}

/// Volume formula versus interface integral for the pressure couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub b1_volume: f64,
    pub b1_interface: f64,
    pub b2_volume: f64,
    pub b2_interface: f64,
    pub max_defect: f64,
}

/// Minimum eigenvalues of the coupled elastic form and of `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub elastic_min_eig: f64,
    pub k_min_eig: f64,
    pub alpha_h: f64,
    /// `K` vanishes (isolated pores, no Darcy transport).
    pub k_degenerate: bool,
    /// `alpha_h` vanishes (no interface).
    pub alpha_degenerate: bool,
}

/// Everything computed while assembling coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub coefficients: EffectiveCoefficients,
    pub duality: DualityReport,
    /// `∫ A D(chi_0) : D(chi_0)`, equal to `alpha_h`.
    pub alpha_energy: f64,
    /// `∫ q_1 . e_1`, equal to `K_11`.
    pub k_flux: f64,
    pub positivity: PositivityReport,
}

fn sub(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] - s * b[0], a[1] - s * b[1], a[2] - s * b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// `(a*, b*, c*)` from the in-plane and bending correctors of index `(1,1)`.
pub fn assemble_elastic_tensors(cells: &CellSolutionSet) -> (f64, f64, f64) {
    let fe = &cells.fe;
    let a = &cells.material;
    let m = unit_strain(0, 0);
    let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
    crate::fem::integrate::for_each_qp(fe, Some(Phase::Solid), |q| {
        let ex = add(vec_strain(fe, &cells.chi[0][0], q.t, q.l, &q.geom), m);
        let eb = sub(vec_strain(fe, &cells.chi_b[0][0], q.t, q.l, &q.geom), m, q.x[1]);
        sa += q.w * a.pair(ex, ex);
        sb += q.w * a.pair(eb, ex);
        sc += q.w * a.pair(eb, eb);
    });
    (sa, sb, sc)
}

/// `(B1, B2)` from the volume formulas, together with the interface
/// integrals `∫_Γ chi_11 . ν` and `∫_Γ chiB_11 . ν` they must equal.
pub fn assemble_pressure_couplings(cells: &CellSolutionSet, tol: f64) -> Result<(f64, f64, DualityReport), CheckError> {
    let fe = &cells.fe;
    let a = &cells.material;
    let sm = a.stress(unit_strain(0, 0));
    let dot = |e: [f64; 3]| sm[0] * e[0] + sm[1] * e[1] + sm[2] * e[2];
    let b1 = integrate(fe, Some(Phase::Solid), |q| dot(vec_strain(fe, &cells.chi0, q.t, q.l, &q.geom)));
    let b2 = -integrate(fe, Some(Phase::Solid), |q| q.x[1] * dot(vec_strain(fe, &cells.chi0, q.t, q.l, &q.geom)));
    let flux = |f: &[[f64; 2]]| {
        integrate_edges(fe, EdgeTag::Interface, |q| {
            let v = vec_value(fe, f, q.t, q.l);
            v[0] * q.normal[0] + v[1] * q.normal[1]
        })
        .unwrap_or(0.0)
    };
    let b1_interface = flux(&cells.chi[0][0]);
    let b2_interface = flux(&cells.chi_b[0][0]);
    let max_defect = (b1 - b1_interface).abs().max((b2 - b2_interface).abs());
    let report = DualityReport { b1_volume: b1, b1_interface, b2_volume: b2, b2_interface, max_defect };
    if max_defect > tol {
        return Err(CheckError::DualityViolation(format!(
            "B1 {b1:.10e} vs {b1_interface:.10e}, B2 {b2:.10e} vs {b2_interface:.10e}"
        )));
    }
    Ok((b1, b2, report))
}

/// `alpha_h = -∫_Γ chi_0 . ν` and the elastic energy of `chi_0`. Zero without
/// an interface; an interface with non-positive value is an error.
pub fn assemble_alpha_h(cells: &CellSolutionSet) -> Result<(f64, f64), CheckError> {
    let fe = &cells.fe;
    let energy = integrate(fe, Some(Phase::Solid), |q| {
        let e = vec_strain(fe, &cells.chi0, q.t, q.l, &q.geom);
        cells.material.pair(e, e)
    });
    if !cells.has_interface() {
        return Ok((0.0, energy));
    }
    let alpha = -integrate_edges(fe, EdgeTag::Interface, |q| {
        let v = vec_value(fe, &cells.chi0, q.t, q.l);
        v[0] * q.normal[0] + v[1] * q.normal[1]
    })
    .map_err(|e| CheckError::MissingCellSolutions(e.to_string()))?;
    if !(alpha > 0.0) {
        return Err(CheckError::NonpositiveAlpha(alpha));
    }
    Ok((alpha, energy))
}

/// `K_ij = ∫ D(q_i) : D(q_j)` and the flux `∫ q_1 . e_1`.
pub fn assemble_permeability(cells: &CellSolutionSet) -> ([[f64; 2]; 2], f64) {
    let fe = &cells.fe;
    let mut k = [[0.0; 2]; 2];
    if !cells.has_fluid() {
        return (k, 0.0);
    }
    let c = ElasticityTensor::identity();
    crate::fem::integrate::for_each_qp(fe, Some(Phase::Fluid), |q| {
        let e = [
            vec_strain(fe, &cells.q[0], q.t, q.l, &q.geom),
            vec_strain(fe, &cells.q[1], q.t, q.l, &q.geom),
        ];
        for i in 0..2 {
            for j in 0..2 {
                k[i][j] += q.w * c.pair(e[i], e[j]);
            }
        }
    });
    let flux = integrate(fe, Some(Phase::Fluid), |q| vec_value(fe, &cells.q[0], q.t, q.l)[0]);
    (k, flux)
}

/// Phase volumes and `y2`-moments of the meshed cell.
pub fn geometric_moments(pm: &PeriodicMesh) -> Moments {
    let m = &pm.mesh;
    Moments {
        vol_f: m.phase_area(Some(Phase::Fluid)),
        vol_s: m.phase_area(Some(Phase::Solid)),
        d_n_f: m.phase_moment(Phase::Fluid),
        d_n_s: m.phase_moment(Phase::Solid),
    }
}

/// Fails unless the solutions were computed on `pm`.
pub fn ensure_same_mesh(cells: &CellSolutionSet, pm: &PeriodicMesh) -> Result<(), CheckError> {
    if cells.mesh_hash == pm.hash() {
        Ok(())
    } else {
        Err(CheckError::MismatchedMesh)
    }
}

fn sym2_min_eig(m: [[f64; 2]; 2]) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    0.5 * tr - disc
}

/// Checks positivity of the coupled elastic form `[[a*, b*], [b*, c*]]`, of
/// `K` (positive semi-definite; zero marks isolated pores) and `alpha_h >= 0`.
pub fn check_positivity(c: &EffectiveCoefficients) -> Result<PositivityReport, CheckError> {
    let elastic_min_eig = sym2_min_eig([[c.a_star, c.b_star], [c.b_star, c.c_star]]);
    let k_min_eig = c.k;
    let scale = c.a_star.abs().max(c.c_star.abs()).max(f64::MIN_POSITIVE);
    let report = PositivityReport {
        elastic_min_eig,
        k_min_eig,
        alpha_h: c.alpha_h,
        k_degenerate: c.k.abs() <= 1e-12,
        alpha_degenerate: c.alpha_h.abs() <= 1e-14,
    };
    if !(elastic_min_eig > 1e-12 * scale) {
        return Err(CheckError::PositivityViolation(format!(
            "elastic form [[{}, {}], [{}, {}]] has minimum eigenvalue {elastic_min_eig:.3e}",
            c.a_star, c.b_star, c.b_star, c.c_star
        )));
    }
    if k_min_eig < -1e-12 || !k_min_eig.is_finite() {
        return Err(CheckError::PositivityViolation(format!("permeability {k_min_eig:.3e} is negative")));
    }
    if c.alpha_h < 0.0 || !c.alpha_h.is_finite() {
        return Err(CheckError::NonpositiveAlpha(c.alpha_h));
    }
    Ok(report)
}

/// Assembles every coefficient, checks the duality identities and positivity.
pub fn compute_coefficients(
    cells: &CellSolutionSet,
    pm: &PeriodicMesh,
    geometry: &CellGeometry,
) -> Result<CoefficientReport, Error> {
    ensure_same_mesh(cells, pm)?;
    let (a_star, b_star, c_star) = assemble_elastic_tensors(cells);
    let (b1, b2, duality) = assemble_pressure_couplings(cells, DUALITY_TOL)?;
    let (alpha_h, alpha_energy) = assemble_alpha_h(cells)?;
    let (k_full, k_flux) = assemble_permeability(cells);
    let mo = geometric_moments(pm);
    let coefficients = EffectiveCoefficients {
        a_star,
        b_star,
        c_star,
        b1,
        b2,
        alpha_h,
        k: k_full[0][0],
        d_n_f: mo.d_n_f,
        d_n_s: mo.d_n_s,
        vol_f: mo.vol_f,
        vol_s: mo.vol_s,
        provenance: Provenance {
            geometry: serde_json::to_value(&geometry.fluid)?,
            h: pm.h,
            a: *cells.material.voigt(),
            mesh_hash: cells.mesh_hash.clone(),
        },
        k_full,
        solid_averaged: Some(SolidAveragedElastic {
            a_star: a_star / mo.vol_s,
            b_star: b_star / mo.vol_s,
            c_star: c_star / mo.vol_s,
        }),
    };
    let positivity = check_positivity(&coefficients)?;
    Ok(CoefficientReport { coefficients, duality, alpha_energy, k_flux, positivity })
}
