//! Periodic cell problems: elastic correctors for in-plane strains and
//! bending, the pressure corrector driven by an interface load, and the
//! Stokes cells defining the permeability.

mod verify;

pub use verify::{verify_analytic_cells, IdentityCheck};

use crate::error::{Error, GeometryError, SolverError};
use crate::fem::assemble::{load_body, load_edges, load_strain, mean_value_rows};
use crate::fem::{assemble_bilinear, DirectSolver, Element, FeMesh, Form, FunctionSpace, Triplets};
use crate::geometry::{EdgeTag, PeriodicMesh, Phase};
use crate::material::{unit_strain, ElasticityTensor};
use crate::par::Exec;

/// Nodal P2 vector field on all P2 nodes of the cell mesh.
pub type VecField = Vec<[f64; 2]>;

/// Index pairs `(i, j)` with `i <= j`.
pub const PAIRS: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 1)];

/// All cell-problem solutions on one cell mesh.
#[derive(Clone, Debug)]
pub struct CellSolutionSet {
    pub fe: FeMesh,
    pub mesh_hash: String,
    pub material: ElasticityTensor,
    /// `chi[i][j]`, symmetric in `(i, j)`.
    pub chi: [[VecField; 2]; 2],
    pub chi_b: [[VecField; 2]; 2],
    pub chi0: VecField,
    /// Stokes velocities (zero when the cell has no fluid).
    pub q: [VecField; 2],
    /// Stokes pressures as vertex values (midpoint entries unused).
    pub pi: [Vec<f64>; 2],
    pub solid_components: Vec<Option<usize>>,
    pub n_solid_components: usize,
    pub fluid_components: Vec<Option<usize>>,
    pub n_fluid_components: usize,
    /// Relative residual of every solve by problem id, plus the discrete
    /// divergence residuals `div_q_i` of the Stokes velocities.
    pub residuals: Vec<(String, f64)>,
    /// Galerkin energy identity defect of every elastic solve, by problem id.
    pub energy_defects: Vec<(String, f64)>,
}

impl CellSolutionSet {
    pub fn has_fluid(&self) -> bool {
        self.n_fluid_components > 0
    }

    pub fn has_interface(&self) -> bool {
        self.fe.mesh.edges_with_tag(EdgeTag::Interface).next().is_some()
    }

    /// Problem ids in a fixed order, matching [`Self::field`].
    pub fn problem_ids(&self) -> Vec<String> {
        let mut ids = Vec::new();
        for (i, j) in PAIRS {
            ids.push(format!("chi_{}{}", i + 1, j + 1));
        }
        for (i, j) in PAIRS {
            ids.push(format!("chiB_{}{}", i + 1, j + 1));
        }
        ids.push("chi_0".to_string());
        ids.push("q_1".to_string());
        ids.push("q_2".to_string());
        ids
    }

    /// Nodal field of a problem id from [`Self::problem_ids`].
    pub fn field(&self, id: &str) -> Option<&VecField> {
        let idx = |c: u8| (c as usize).checked_sub(b'1' as usize).filter(|i| *i < 2);
        let b = id.as_bytes();
        match id {
            "chi_0" => Some(&self.chi0),
            "q_1" => Some(&self.q[0]),
            "q_2" => Some(&self.q[1]),
            _ if id.starts_with("chiB_") && b.len() == 7 => Some(&self.chi_b[idx(b[5])?][idx(b[6])?]),
            _ if id.starts_with("chi_") && b.len() == 6 => Some(&self.chi[idx(b[4])?][idx(b[5])?]),
            _ => None,
        }
    }
}

/// Saddle system for the solid correctors: elasticity on the periodic solid
/// with one mean-value multiplier per solid component and direction.
pub struct SolidCellSystem {
    pub space: FunctionSpace,
    pub stiffness: crate::fem::CsrMatrix,
    solver: DirectSolver,
    n_mult: usize,
}

impl SolidCellSystem {
    pub fn new(pm: &PeriodicMesh, fe: &FeMesh, a: &ElasticityTensor, exec: Exec, tol: f64) -> Result<Self, Error> {
        if pm.n_solid_components == 0 {
            return Err(GeometryError::DegenerateRegion("cell has no solid part".into()).into());
        }
        let space = FunctionSpace::new(fe, Element::P2Vec, Some(Phase::Solid), &[]);
        let stiffness = assemble_bilinear(fe, Form::Elastic(a), Some(Phase::Solid), &space, &space, exec)?;
        let rows = mean_value_rows(fe, &space, &pm.solid_components, pm.n_solid_components);
        let n = space.n_dofs();
        let n_mult = rows.len();
        let mut t = Triplets::new(n + n_mult, n + n_mult);
        t.add_block(&stiffness, 0, 0, 1.0);
        for (k, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t.push(n + k, j, *v);
                t.push(j, n + k, *v);
            }
        }
        let solver = DirectSolver::factor(&t.to_csr(), tol)?;
        Ok(Self { space, stiffness, solver, n_mult })
    }

    /// Solves with load vector `b` (on the displacement DOFs); returns the
    /// nodal field, the relative residual and the energy identity defect.
    pub fn solve(&self, b: &[f64]) -> Result<(VecField, f64, f64), SolverError> {
        let n = self.space.n_dofs();
        let mut rhs = b.to_vec();
        rhs.extend(std::iter::repeat(0.0).take(self.n_mult));
        let x = self.solver.solve(&rhs)?;
        let res = crate::fem::solve::relative_residual(self.solver.matrix(), &x, &rhs);
        let u = &x[..n];
        let energy = self.stiffness.bilinear(u, u);
        let work: f64 = u.iter().zip(b).map(|(p, q)| p * q).sum();
        let defect = (energy - work).abs() / energy.abs().max(work.abs()).max(f64::MIN_POSITIVE);
        Ok((self.space.to_nodal_vec(u), res, if energy == 0.0 && work == 0.0 { 0.0 } else { defect }))
    }

    /// Load of the in-plane corrector `chi_ij`: `-∫ A M_ij : D(v)`.
    pub fn load_chi(&self, fe: &FeMesh, a: &ElasticityTensor, (i, j): (usize, usize)) -> Vec<f64> {
        let s = a.stress(unit_strain(i, j));
        load_strain(fe, &self.space, Some(Phase::Solid), |_| [-s[0], -s[1], -s[2]])
    }

    /// Load of the bending corrector `chiB_ij`: `∫ y2 A M_ij : D(v)`.
    pub fn load_chi_b(&self, fe: &FeMesh, a: &ElasticityTensor, (i, j): (usize, usize)) -> Vec<f64> {
        let s = a.stress(unit_strain(i, j));
        load_strain(fe, &self.space, Some(Phase::Solid), |p| [p.x[1] * s[0], p.x[1] * s[1], p.x[1] * s[2]])
    }

    /// Load of the pressure corrector: `-∫_Γ v . ν` with `ν` the solid's outward normal.
    pub fn load_chi0(&self, fe: &FeMesh) -> Vec<f64> {
        load_edges(fe, &self.space, EdgeTag::Interface, |_, n| [-n[0], -n[1]])
    }
}

/// Stokes cell system: Taylor-Hood on the periodic fluid with no-slip on the
/// interface and zero-mean pressure per fluid component.
pub struct StokesCellSystem {
    pub velocity: FunctionSpace,
    pub pressure: FunctionSpace,
    /// Discrete divergence `∫ q div(v)` (pressure rows, velocity columns).
    pub divergence: crate::fem::CsrMatrix,
    solver: DirectSolver,
    n_mult: usize,
}

impl StokesCellSystem {
    pub fn new(pm: &PeriodicMesh, fe: &FeMesh, exec: Exec, tol: f64) -> Result<Self, Error> {
        if pm.n_fluid_components == 0 {
            return Err(GeometryError::DegenerateRegion("cell has no fluid part".into()).into());
        }
        let fixed = fe.nodes_on_edges(&[EdgeTag::Interface]);
        let velocity = FunctionSpace::new(fe, Element::P2Vec, Some(Phase::Fluid), &fixed);
        let pressure = FunctionSpace::new(fe, Element::P1, Some(Phase::Fluid), &[]);
        let v = assemble_bilinear(fe, Form::Viscous, Some(Phase::Fluid), &velocity, &velocity, exec)?;
        let b = assemble_bilinear(fe, Form::DivCoupling, Some(Phase::Fluid), &pressure, &velocity, exec)?;
        let rows = mean_value_rows(fe, &pressure, &pm.fluid_components, pm.n_fluid_components);
        let (nv, np, nm) = (velocity.n_dofs(), pressure.n_dofs(), rows.len());
        let mut t = Triplets::new(nv + np + nm, nv + np + nm);
        t.add_block(&v, 0, 0, 1.0);
        t.add_block(&b, nv, 0, -1.0);
        t.add_block_transposed(&b, 0, nv, -1.0);
        for (k, row) in rows.iter().enumerate() {
            for (j, val) in row.iter().enumerate() {
                t.push(nv + np + k, nv + j, *val);
                t.push(nv + j, nv + np + k, *val);
            }
        }
        let solver = DirectSolver::factor(&t.to_csr(), tol)?;
        Ok(Self { velocity, pressure, divergence: b, solver, n_mult: nm })
    }

    /// Solves with unit body force `e_i`; returns velocity, pressure vertex
    /// values and the relative residual.
    pub fn solve(&self, fe: &FeMesh, i: usize) -> Result<(VecField, Vec<f64>, f64), SolverError> {
        let mut force = [0.0; 2];
        force[i] = 1.0;
        self.solve_force(fe, force)
    }

    pub fn solve_force(&self, fe: &FeMesh, force: [f64; 2]) -> Result<(VecField, Vec<f64>, f64), SolverError> {
        let (nv, np) = (self.velocity.n_dofs(), self.pressure.n_dofs());
        let mut rhs = load_body(fe, &self.velocity, Some(Phase::Fluid), Exec::Sequential, |_| force);
        rhs.extend(std::iter::repeat(0.0).take(np + self.n_mult));
        let x = self.solver.solve(&rhs)?;
        let res = crate::fem::solve::relative_residual(self.solver.matrix(), &x, &rhs);
        Ok((self.velocity.to_nodal_vec(&x[..nv]), self.pressure.to_nodal(&x[nv..nv + np]), res))
    }

    /// Largest entry of the discrete divergence of a velocity field.
    pub fn divergence_residual(&self, q: &[[f64; 2]]) -> f64 {
        let x = self.velocity.from_nodal_vec(q);
        self.divergence.matvec(&x).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Solves the in-plane corrector `chi_ij` (indices in `0..2`).
pub fn solve_chi(pm: &PeriodicMesh, a: &ElasticityTensor, ij: (usize, usize)) -> Result<VecField, Error> {
    let fe = FeMesh::periodic(pm);
    let sys = SolidCellSystem::new(pm, &fe, a, Exec::default(), crate::fem::DEFAULT_TOL)?;
    Ok(sys.solve(&sys.load_chi(&fe, a, ij))?.0)
}

/// Solves the bending corrector `chiB_ij`.
pub fn solve_chi_b(pm: &PeriodicMesh, a: &ElasticityTensor, ij: (usize, usize)) -> Result<VecField, Error> {
    let fe = FeMesh::periodic(pm);
    let sys = SolidCellSystem::new(pm, &fe, a, Exec::default(), crate::fem::DEFAULT_TOL)?;
    Ok(sys.solve(&sys.load_chi_b(&fe, a, ij))?.0)
}

/// Solves the pressure corrector `chi_0`.
pub fn solve_chi_0(pm: &PeriodicMesh, a: &ElasticityTensor) -> Result<VecField, Error> {
    let fe = FeMesh::periodic(pm);
    let sys = SolidCellSystem::new(pm, &fe, a, Exec::default(), crate::fem::DEFAULT_TOL)?;
    Ok(sys.solve(&sys.load_chi0(&fe))?.0)
}

/// Solves the Stokes cell problem with force `e_i`.
pub fn solve_stokes_cell(pm: &PeriodicMesh, i: usize) -> Result<(VecField, Vec<f64>), Error> {
    let fe = FeMesh::periodic(pm);
    let sys = StokesCellSystem::new(pm, &fe, Exec::default(), crate::fem::DEFAULT_TOL)?;
    let (q, p, _) = sys.solve(&fe, i)?;
    Ok((q, p))
}

/// Solves every cell problem on `pm`. The solid family shares one
/// factorization, the Stokes family another; the two families run
/// concurrently in parallel mode.
pub fn solve_cells(pm: &PeriodicMesh, a: &ElasticityTensor, exec: Exec, tol: f64) -> Result<CellSolutionSet, Error> {
    let fe = FeMesh::periodic(pm);
    let nn = fe.n_nodes();
    let zero = vec![[0.0; 2]; nn];
    type SolidOut = ([[VecField; 2]; 2], [[VecField; 2]; 2], VecField, Vec<(String, f64)>, Vec<(String, f64)>);
    let solid = || -> Result<SolidOut, Error> {
        let sys = SolidCellSystem::new(pm, &fe, a, exec, tol)?;
        let mut res = Vec::new();
        let mut energy = Vec::new();
        let mut chi: [[VecField; 2]; 2] = Default::default();
        let mut chi_b: [[VecField; 2]; 2] = Default::default();
        for (i, j) in PAIRS {
            let (u, r, e) = sys.solve(&sys.load_chi(&fe, a, (i, j)))?;
            res.push((format!("chi_{}{}", i + 1, j + 1), r));
            energy.push((format!("chi_{}{}", i + 1, j + 1), e));
            chi[i][j] = u.clone();
            chi[j][i] = u;
            let (u, r, e) = sys.solve(&sys.load_chi_b(&fe, a, (i, j)))?;
            res.push((format!("chiB_{}{}", i + 1, j + 1), r));
            energy.push((format!("chiB_{}{}", i + 1, j + 1), e));
            chi_b[i][j] = u.clone();
            chi_b[j][i] = u;
        }
        let (c0, r, e) = sys.solve(&sys.load_chi0(&fe))?;
        res.push(("chi_0".into(), r));
        energy.push(("chi_0".into(), e));
        Ok((chi, chi_b, c0, res, energy))
    };
    type FluidOut = ([VecField; 2], [Vec<f64>; 2], Vec<(String, f64)>);
    let fluid = || -> Result<FluidOut, Error> {
        if pm.n_fluid_components == 0 {
            return Ok(([zero.clone(), zero.clone()], [vec![0.0; nn], vec![0.0; nn]], Vec::new()));
        }
        let sys = StokesCellSystem::new(pm, &fe, exec, tol)?;
        let (q1, p1, r1) = sys.solve(&fe, 0)?;
        let (q2, p2, r2) = sys.solve(&fe, 1)?;
        let (d1, d2) = (sys.divergence_residual(&q1), sys.divergence_residual(&q2));
        let res = vec![("q_1".into(), r1), ("q_2".into(), r2), ("div_q_1".into(), d1), ("div_q_2".into(), d2)];
        Ok(([q1, q2], [p1, p2], res))
    };
    let (s, f) = exec.join(solid, fluid);
    let (chi, chi_b, chi0, mut residuals, energy_defects) = s?;
    let (q, pi, fres) = f?;
    residuals.extend(fres);
    Ok(CellSolutionSet {
        mesh_hash: pm.hash(),
        material: *a,
        chi,
        chi_b,
        chi0,
        q,
        pi,
        solid_components: pm.solid_components.clone(),
        n_solid_components: pm.n_solid_components,
        fluid_components: pm.fluid_components.clone(),
        n_fluid_components: pm.n_fluid_components,
        residuals,
        energy_defects,
        fe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::integrate::{integrate, vec_strain, vec_value};
    use crate::geometry::CellGeometry;

    #[test]
    fn full_solid_in_plane_corrector_is_linear() {
        // Traction-free top/bottom: chi_11 = -lambda/(lambda + 2 mu) y2 e2 + const.
        let (lam, mu) = (1.5, 0.7);
        let a = ElasticityTensor::isotropic(lam, mu).unwrap();
        let pm = CellGeometry::solid().mesh(0.25).unwrap();
        let fe = FeMesh::periodic(&pm);
        let chi = solve_chi(&pm, &a, (0, 0)).unwrap();
        let c = -lam / (lam + 2.0 * mu);
        let err = integrate(&fe, None, |q| {
            let v = vec_value(&fe, &chi, q.t, q.l);
            v[0].powi(2) + (v[1] - c * q.x[1]).powi(2)
        });
        assert!(err.sqrt() < 1e-10, "{err}");
        let e = integrate(&fe, None, |q| {
            let s = vec_strain(&fe, &chi, q.t, q.l, &q.geom);
            (s[1] - c).abs()
        });
        assert!(e < 1e-10);
    }

    #[test]
    fn chi0_vanishes_without_interface() {
        let a = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
        let pm = CellGeometry::solid().mesh(0.5).unwrap();
        let c0 = solve_chi_0(&pm, &a).unwrap();
        assert!(c0.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    }

    #[test]
    fn channel_needs_per_component_constraints() {
        // Two solid components: the solve succeeds because each carries its
        // own mean-value multipliers.
        let a = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
        let pm = CellGeometry::channel(-0.3, 0.3).unwrap().mesh(0.2).unwrap();
        assert_eq!(pm.n_solid_components, 2);
        let set = solve_cells(&pm, &a, Exec::Sequential, 1e-10).unwrap();
        assert!(set.residuals.iter().all(|(_, r)| *r < 1e-10));
    }

    #[test]
    fn stokes_without_fluid_fails() {
        let pm = CellGeometry::solid().mesh(0.5).unwrap();
        assert!(solve_stokes_cell(&pm, 0).is_err());
    }
}
