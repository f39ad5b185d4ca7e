use poroplate::fem::{assemble_bilinear, solve_spd, Form};
use poroplate::forcing::{MacroForcing, Profile, Shape};
use poroplate::geometry::{CellGeometry, LayerGeometry, LayerSides, Phase};
use poroplate::micro::{compare_dae_vs_monolithic, dae_solve, galerkin_reduce, MicroForcing, MicroSystem, GalerkinSystem};
use poroplate::{ElasticityTensor, Exec};

fn loads() -> MacroForcing {
    MacroForcing {
        f0: Profile::ramp_hold(1.0, 0.1, None, Shape::Sine { mode: 1 }),
        g0: Profile::ramp_hold(0.5, 0.1, None, Shape::Constant),
        f1_bar: Profile::ramp_hold(-1.0, 0.1, None, Shape::Sine { mode: 1 }),
        g1_bar: Profile::ramp_hold(0.3, 0.1, None, Shape::Sine { mode: 2 }),
    }
}

fn material() -> ElasticityTensor {
    ElasticityTensor::isotropic(1.0, 1.0).unwrap()
}

fn system(g: &CellGeometry, h: f64, eps: f64, dt: f64) -> MicroSystem {
    let pm = g.mesh(h).unwrap();
    let layer = LayerGeometry::extrude(&pm, (0.0, 1.0), eps, LayerSides::default()).unwrap();
    MicroSystem::new(&layer, &material(), dt, 1e-10, Exec::default()).unwrap()
}

fn forcing(g: &CellGeometry, f: MacroForcing) -> MicroForcing {
    MicroForcing::new(f, (0.0, 1.0), g.fluid_area(), 2.0 - g.fluid_area()).unwrap()
}

fn coarse_cavity() -> (CellGeometry, MicroSystem) {
    let g = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap();
    let sys = system(&g, 0.34, 0.5, 0.02);
    (g, sys)
}

fn coarse_channel() -> (CellGeometry, MicroSystem) {
    let g = CellGeometry::channel(-0.3, 0.3).unwrap();
    let sys = system(&g, 0.5, 0.5, 0.02);
    (g, sys)
}

#[test]
fn step_matrix_is_symmetric() {
    let (_, sys) = coarse_cavity();
    assert!(sys.system.asymmetry() <= 1e-12 * sys.system.max_abs());
}

#[test]
fn zero_forcing_gives_zero_step_and_monitors() {
    let (g, sys) = coarse_cavity();
    let f = forcing(&g, MacroForcing::zero());
    let s = sys.step(&sys.zero_state(), &f).unwrap();
    assert!(s.w.iter().chain(&s.p).all(|v| *v == 0.0));
    let m = sys.run_with(&f, 0.2, |_, _| Ok(())).unwrap().monitors;
    assert_eq!([m.r_v, m.r_u, m.r_p, m.r_w, m.r_vi], [0.0; 5]);
}

#[test]
fn zero_end_time_keeps_initial_state() {
    let (g, sys) = coarse_cavity();
    let (run, states) = sys.run_trajectory(&forcing(&g, loads()), 0.0).unwrap();
    assert_eq!(states.len(), 1);
    assert!(run.log.is_empty());
    assert_eq!(run.final_state, sys.zero_state());
}

#[test]
fn doubling_the_forcing_doubles_every_monitor() {
    let (g, sys) = coarse_cavity();
    let f = forcing(&g, loads());
    let one = sys.run_with(&f, 0.2, |_, _| Ok(())).unwrap().monitors;
    let two = sys.run_with(&f.scaled(2.0), 0.2, |_, _| Ok(())).unwrap().monitors;
    for (a, b) in [(one.r_v, two.r_v), (one.r_u, two.r_u), (one.r_p, two.r_p), (one.r_w, two.r_w), (one.r_vi, two.r_vi)] {
        assert!(a > 0.0);
        assert!((b / a - 2.0).abs() <= 1e-8, "{a} {b}");
    }
}

#[test]
fn velocity_is_discretely_divergence_free() {
    let (g, sys) = coarse_cavity();
    let (_, states) = sys.run_trajectory(&forcing(&g, loads()), 0.1).unwrap();
    for s in &states[1..] {
        let div = sys.div.matvec(&s.w);
        let scale = s.w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(div.iter().all(|d| d.abs() <= 1e-9 * scale.max(1.0)));
    }
}

#[test]
fn increments_decay_under_constant_load() {
    let (g, sys) = coarse_cavity();
    let (run, _) = sys.run_trajectory(&forcing(&g, loads()), 2.0).unwrap();
    let held: Vec<f64> = run.log.iter().filter(|l| l.t > 0.11).map(|l| l.dv).collect();
    assert!(held.windows(2).all(|w| w[1] <= w[0]));
    let (early, late) = (held[0], *held.last().unwrap());
    assert!(late < 0.1 * early, "{early} {late}");
}

#[test]
fn energy_is_dissipated_after_load_cutoff() {
    let (g, sys) = coarse_cavity();
    // The run itself rejects any load-free step that gains energy.
    let (run, _) = sys.run_trajectory(&forcing(&g, loads().with_cutoff(0.5)), 1.0).unwrap();
    let after: Vec<f64> = run.log.iter().filter(|l| l.t > 0.5).map(|l| l.elastic_energy).collect();
    assert!(after.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!(after.last().unwrap() < &(0.5 * after[0]));
}

#[test]
fn time_step_self_convergence_is_first_order() {
    let g = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap();
    let f = forcing(&g, loads());
    let t_end = 0.2;
    let final_u = |dt: f64| {
        let sys = system(&g, 0.34, 0.5, dt);
        let run = sys.run_with(&f, t_end, |_, _| Ok(())).unwrap();
        (run.final_state.u, sys)
    };
    let (reference, sys) = final_u(0.2 / 64.0);
    let err = |dt: f64| {
        let u = final_u(dt).0;
        let d: Vec<f64> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();
        sys.mass_s.bilinear(&d, &d).sqrt()
    };
    let (e1, e2) = (err(0.2 / 4.0), err(0.2 / 8.0));
    let order = (e1 / e2).log2();
    assert!((0.7..=1.5).contains(&order), "order {order}");
}

#[test]
fn solid_only_layer_is_quasistatic_elasticity() {
    let g = CellGeometry::solid();
    let eps = 0.5;
    let sys = system(&g, 0.34, eps, 0.05);
    assert_eq!(sys.pressure.n_dofs(), 0);
    let f = MicroForcing::new(
        MacroForcing { f0: Profile::Zero, f1_bar: Profile::Zero, ..loads() },
        (0.0, 1.0),
        0.0,
        2.0,
    )
    .unwrap();
    let k = assemble_bilinear(&sys.fe, Form::Elastic(&material()), Some(Phase::Solid), &sys.velocity, &sys.velocity, Exec::Sequential)
        .unwrap();
    let (_, states) = sys.run_trajectory(&f, 0.3).unwrap();
    for s in &states[1..] {
        let rhs: Vec<f64> = sys.load(&f, s.t).iter().map(|v| eps * v).collect();
        let u = solve_spd(&k, &rhs, 1e-13).unwrap();
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = u.iter().zip(&s.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-8 * scale, "{diff} vs {scale}");
    }
}

fn check_reduced(gs: &GalerkinSystem) {
    assert!(gs.identity_defect <= 1e-10);
    assert!(gs.orthonormality_defect <= 1e-10);
    assert!(gs.d.iter().all(|d| (-1e-12..=1.0 + 1e-12).contains(d)));
    assert!(gs.rank > 0 && gs.rank < gs.dimension);
}

#[test]
fn reduced_basis_is_orthonormal_and_splits_identity() {
    for (_, sys) in [coarse_cavity(), coarse_channel()] {
        assert!(sys.velocity.n_dofs() <= 500);
        check_reduced(&galerkin_reduce(&sys, None).unwrap());
    }
}

#[test]
fn reduced_basis_rejects_oversized_request() {
    let (_, sys) = coarse_channel();
    let gs = galerkin_reduce(&sys, None).unwrap();
    assert!(galerkin_reduce(&sys, Some(gs.dimension + 1)).is_err());
    assert!(galerkin_reduce(&sys, Some(0)).is_err());
}

#[test]
fn dae_matches_monolithic_at_full_rank() {
    for (g, sys) in [coarse_cavity(), coarse_channel()] {
        let f = forcing(&g, loads());
        let c = compare_dae_vs_monolithic(&sys, &f, 50.0 * sys.dt, None).unwrap();
        assert!(c.rel_u <= 1e-6 && c.rel_v <= 1e-6, "{c:?}");
        assert!(c.identity_defect <= 1e-10);
        assert!(c.eig_min >= -1e-12 && c.eig_max <= 1.0 + 1e-12);
    }
}

#[test]
fn truncated_basis_has_larger_discrepancy() {
    let (g, sys) = coarse_channel();
    let f = forcing(&g, loads());
    let full = compare_dae_vs_monolithic(&sys, &f, 0.5, None).unwrap();
    let half = compare_dae_vs_monolithic(&sys, &f, 0.5, Some(full.dimension / 2)).unwrap();
    let most = compare_dae_vs_monolithic(&sys, &f, 0.5, Some(full.dimension * 9 / 10)).unwrap();
    assert!(half.rel_u > 1e3 * full.rel_u.max(1e-14));
    assert!(most.rel_u + most.rel_v <= half.rel_u + half.rel_v);
}

#[test]
fn dae_with_zero_forcing_stays_zero() {
    let (g, sys) = coarse_channel();
    let gs = galerkin_reduce(&sys, None).unwrap();
    let alpha = dae_solve(&gs, &sys, &forcing(&g, MacroForcing::zero()), 0.2).unwrap();
    assert!(alpha.iter().all(|a| a.iter().all(|v| *v == 0.0)));
}

#[test]
fn sequential_and_parallel_runs_are_identical() {
    let g = CellGeometry::cavity([0.5, 0.0], 0.25).unwrap();
    let pm = g.mesh(0.34).unwrap();
    let layer = LayerGeometry::extrude(&pm, (0.0, 1.0), 0.5, LayerSides::default()).unwrap();
    let f = forcing(&g, loads());
    let run = |exec| {
        let sys = MicroSystem::new(&layer, &material(), 0.02, 1e-10, exec).unwrap();
        sys.run_with(&f, 0.1, |_, _| Ok(())).unwrap()
    };
    assert_eq!(run(Exec::Sequential), run(Exec::default()));
}
