use poroplate::cell::{solve_cells, verify_analytic_cells};
use poroplate::effective::{compute_coefficients, CoefficientReport, DUALITY_TOL};
use poroplate::geometry::CellGeometry;
use poroplate::{ElasticityTensor, Exec};

fn coefficients(g: &CellGeometry, h: f64, exec: Exec) -> CoefficientReport {
    let a = ElasticityTensor::isotropic(1.0, 1.0).unwrap();
    let pm = g.mesh(h).unwrap();
    let cells = solve_cells(&pm, &a, exec, 1e-12).unwrap();
    for check in verify_analytic_cells(&cells, 1e-8) {
        assert!(check.pass, "{} error {:e}", check.name, check.error);
    }
    compute_coefficients(&cells, &pm, g).unwrap()
}

#[test]
fn channel_flux_matches_symmetric_gradient_poiseuille() {
    // With the viscous form D(u):D(v) a unit pressure drop across a gap of
    // width 2 h0 drives u = h0^2 - y^2, so the flux is (2 h0)^3 / 6.
    for (lo, hi) in [(-0.3, 0.3), (-0.2, 0.4)] {
        let g = CellGeometry::channel(lo, hi).unwrap();
        let r = coefficients(&g, 0.1, Exec::default());
        let width: f64 = hi - lo;
        let expected = width.powi(3) / 6.0;
        let k = &r.coefficients.k_full;
        assert!((k[0][0] - expected).abs() <= 1e-10 * expected, "{} vs {expected}", k[0][0]);
        assert!(k[0][1].abs() <= 1e-10 && k[1][0].abs() <= 1e-10 && k[1][1].abs() <= 1e-10);
        assert!((r.k_flux - k[0][0]).abs() <= 1e-10);
    }
}

#[test]
fn closed_cavity_has_no_horizontal_permeability() {
    let g = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap();
    let r = coefficients(&g, 0.15, Exec::default());
    assert!(r.positivity.k_degenerate);
    assert!(r.coefficients.k.abs() <= 1e-12);
    assert!(r.coefficients.alpha_h > 0.0);
    assert!((r.coefficients.alpha_h - r.alpha_energy).abs() <= 1e-8);
    assert!(r.duality.max_defect <= DUALITY_TOL);
    assert!(r.positivity.elastic_min_eig > 0.0);
}

#[test]
fn solid_cell_reduces_to_plate_stiffness() {
    let r = coefficients(&CellGeometry::solid(), 0.2, Exec::default());
    let c = &r.coefficients;
    assert_eq!(c.vol_f, 0.0);
    assert!((c.vol_s - 2.0).abs() <= 1e-12);
    assert!(c.alpha_h.abs() <= 1e-14 && c.k.abs() <= 1e-14);
    // Plane-strain membrane and bending stiffnesses of a unit isotropic plate
    // (lambda = mu = 1, thickness 2): 4 mu (lambda + mu) / (lambda + 2 mu) * |Z|
    // and the same modulus times the second moment 2/3.
    let modulus = 4.0 * 1.0 * 2.0 / 3.0;
    assert!((c.a_star - 2.0 * modulus).abs() <= 1e-8, "{}", c.a_star);
    assert!(c.b_star.abs() <= 1e-8);
    assert!((c.c_star - modulus * 2.0 / 3.0).abs() <= 1e-8, "{}", c.c_star);
}

#[test]
fn offset_cavity_couples_membrane_and_bending() {
    let centred = coefficients(&CellGeometry::cavity([0.5, 0.0], 0.25).unwrap(), 0.15, Exec::default());
    let offset = coefficients(&CellGeometry::cavity([0.5, 0.3], 0.25).unwrap(), 0.15, Exec::default());
    assert!(centred.coefficients.b_star.abs() <= 1e-8);
    assert!(offset.coefficients.b_star.abs() > 1e-4);
    assert!(centred.coefficients.d_n_f.abs() <= 1e-12);
}

#[test]
fn sequential_and_parallel_coefficients_agree() {
    let g = CellGeometry::cavity([0.5, 0.1], 0.2).unwrap();
    let a = coefficients(&g, 0.15, Exec::Sequential);
    let b = coefficients(&g, 0.15, Exec::Parallel);
    assert_eq!(a.coefficients, b.coefficients);
}
