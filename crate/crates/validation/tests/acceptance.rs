//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! terminal; the process fails if any criterion fails.

use poroplate::cell::{solve_cells, verify_analytic_cells, CellSolutionSet};
use poroplate::effective::{compute_coefficients, CoefficientReport, EffectiveCoefficients, DUALITY_TOL};
use poroplate::forcing::MacroForcing;
use poroplate::geometry::{CellGeometry, LayerGeometry, LayerSides, PeriodicMesh};
use poroplate::macro_plate::{build_macro_spaces, run, run_with_sources};
use poroplate::micro::{compare_dae_vs_monolithic, MicroForcing, MicroSystem};
use poroplate::pipeline::{
    default_forcing, execute_spec, parse_config, run_study, Command, Context, Outputs, Overrides, ERROR_RATIO, MONITOR_RATIO,
    SANITY_TOL,
};
use poroplate::{ElasticityTensor, Exec};
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

const TOL: f64 = 1e-10;

struct Verdicts {
    failed: usize,
}

impl Verdicts {
    fn report(&mut self, n: usize, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} criterion {n}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

struct Cell {
    mesh: PeriodicMesh,
    cells: CellSolutionSet,
    report: CoefficientReport,
    seconds: f64,
}

fn material() -> ElasticityTensor {
    ElasticityTensor::isotropic(1.0, 1.0).unwrap()
}

fn cell(g: &CellGeometry, h: f64) -> Cell {
    let start = Instant::now();
    let mesh = g.mesh(h).unwrap();
    let cells = solve_cells(&mesh, &material(), Exec::default(), TOL).unwrap();
    let report = compute_coefficients(&cells, &mesh, g).unwrap();
    Cell { mesh, cells, report, seconds: start.elapsed().as_secs_f64() }
}

fn criterion_1(v: &mut Verdicts, cavity: &Cell, channel: &Cell) {
    let mut worst = 0.0f64;
    let mut all = true;
    let mut count = 0;
    for c in [cavity, channel] {
        for check in verify_analytic_cells(&c.cells, 1e-8) {
            worst = worst.max(check.error);
            all &= check.pass;
            count += 1;
        }
    }
    let seconds = cavity.seconds.max(channel.seconds);
    v.report(
        1,
        all && count > 0 && seconds <= 30.0,
        format!("{count} closed-form cell identities, max L2 error {worst:.2e} (tol 1e-8); cell solve {seconds:.1} s at h = 0.05 (limit 30 s)"),
    );
}

fn criterion_2(v: &mut Verdicts, cavity: &Cell, channel: &Cell) {
    let d = cavity.report.duality.max_defect.max(channel.report.duality.max_defect);
    v.report(2, d <= DUALITY_TOL, format!("max duality defect {d:.2e} on cavity and channel (tol {DUALITY_TOL:.0e})"));
}

fn criterion_3(v: &mut Verdicts, cavity: &Cell, channel: &Cell) {
    let r = &cavity.report;
    let c = &r.coefficients;
    let alpha_gap = (c.alpha_h - r.alpha_energy).abs();
    let k_off = [cavity, channel]
        .iter()
        .map(|x| x.report.coefficients.k_full[0][1].abs().max(x.report.coefficients.k_full[1][1].abs()))
        .fold(0.0f64, f64::max);
    let eig = cavity.report.positivity.elastic_min_eig.min(channel.report.positivity.elastic_min_eig);
    let pass = c.alpha_h > 0.0 && alpha_gap <= 1e-8 && k_off <= 1e-10 && eig > 0.0;
    v.report(
        3,
        pass,
        format!(
            "alpha_h = {:.6e} > 0, |alpha_h - energy| = {alpha_gap:.2e}, max |K12|,|K22| = {k_off:.2e}, min elastic eigenvalue {eig:.4e}",
            c.alpha_h
        ),
    );
}

fn criterion_4(v: &mut Verdicts) {
    let g = CellGeometry::channel(-0.3, 0.3).unwrap();
    let c = cell(&g, 0.025);
    let k11 = c.report.coefficients.k_full[0][0];
    let oracle = 0.6f64.powi(3) / 12.0;
    let rel = (k11 - oracle).abs() / oracle;
    v.report(4, rel <= 0.02, format!("channel K11 = {k11:.6e} vs (2 h0)^3/12 = {oracle:.6e}, relative deviation {rel:.3} (limit 0.02)"));
    // The cell Stokes operator uses the symmetric-gradient form D:D, whose
    // plane Poiseuille flux is exactly twice the Laplacian one.
    let sym = 2.0 * oracle;
    println!(
        "      note: against the symmetric-gradient Poiseuille flux (2 h0)^3/6 = {sym:.6e} the deviation is {:.2e}",
        (k11 - sym).abs() / sym
    );
}

fn manufactured_orders(c: &EffectiveCoefficients) -> Vec<[f64; 2]> {
    let (c1, c2) = (c.b1 - c.vol_f, c.b2 + c.d_n_f);
    let c = c.clone();
    let exact = |t: f64, x: f64| [t * (0.5 * PI * x).cos(), t * (PI * x).sin(), 0.5 * t * (1.0 - (2.0 * PI * x).cos())];
    let cc = c.clone();
    let src = move |t: f64, x: f64| {
        let c = &cc;
        let p_t = (0.5 * PI * x).cos();
        let pxx = -t * PI * PI / 4.0 * (0.5 * PI * x).cos();
        let px = -t * PI / 2.0 * (0.5 * PI * x).sin();
        let ux_t = PI * (PI * x).cos();
        let uxx = -t * PI * PI * (PI * x).sin();
        let uxxx = -t * PI.powi(3) * (PI * x).cos();
        let wxx_t = 2.0 * PI * PI * (2.0 * PI * x).cos();
        let wxxx = -4.0 * t * PI.powi(3) * (2.0 * PI * x).sin();
        let wxxxx = -8.0 * t * PI.powi(4) * (2.0 * PI * x).cos();
        [
            c.alpha_h * p_t - c.k * pxx - c1 * ux_t - c2 * wxx_t,
            -(c.a_star * uxx + c.b_star * wxxx) - c1 * px,
            c.b_star * uxxx + c.c_star * wxxxx + c2 * pxx,
        ]
    };
    let t_end = 0.5;
    let errs: Vec<[f64; 3]> = [9, 17, 33, 65]
        .iter()
        .map(|&n| {
            let sp = build_macro_spaces(0.0, 1.0, n, LayerSides::default()).unwrap();
            let tr = run_with_sources(&c, &sp, &MacroForcing::zero(), Some(&src), t_end, 0.05, TOL).unwrap();
            sp.l2_errors(tr.final_state(), |x| exact(t_end, x))
        })
        .collect();
    errs.windows(2).map(|w| [(w[0][0] / w[1][0]).log2(), (w[0][1] / w[1][1]).log2()]).collect()
}

fn criterion_5(v: &mut Verdicts, channel: &Cell) {
    let start = Instant::now();
    let c = &channel.report.coefficients;
    let sp = build_macro_spaces(0.0, 1.0, 65, LayerSides::default()).unwrap();
    let zero = run(c, &sp, &MacroForcing::zero(), 1.0, 0.01, TOL).unwrap();
    let zero_max = zero.states().fold(0.0f64, |m, s| m.max(s.max_abs()));
    let cut = default_forcing().with_cutoff(1.0);
    let decay = run(c, &sp, &cut, 2.0, 0.01, TOL).unwrap();
    let free: Vec<_> = decay.steps.windows(2).filter(|w| !w[1].loaded).collect();
    let monotone = free.iter().all(|w| w[1].energy <= w[0].energy);
    let orders = manufactured_orders(c);
    let orders_ok = orders.iter().flatten().all(|o| (o - 2.0).abs() <= 0.3);
    let transpose = zero.transpose_defect.max(decay.transpose_defect);
    let seconds = start.elapsed().as_secs_f64();
    let pass = zero_max == 0.0 && decay.steps.len() == 201 && free.len() == 100 && monotone && orders_ok && transpose <= 1e-12 && seconds <= 60.0;
    v.report(
        5,
        pass,
        format!(
            "zero-forcing max {zero_max:.1e}; energy non-increasing on {} load-free steps of 200: {monotone}; \
             manufactured orders (p0, u1) {orders:.3?}; transpose defect {transpose:.1e}; {seconds:.1} s",
            free.len()
        ),
    );
}

fn criterion_6(v: &mut Verdicts) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut identity = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_dofs = 0;
    for (g, h) in [(CellGeometry::cavity([0.5, 0.0], 0.25).unwrap(), 0.34), (CellGeometry::channel(-0.3, 0.3).unwrap(), 0.5)] {
        let pm = g.mesh(h).unwrap();
        let layer = LayerGeometry::extrude(&pm, (0.0, 1.0), 0.5, LayerSides::default()).unwrap();
        let sys = MicroSystem::new(&layer, &material(), 0.02, TOL, Exec::default()).unwrap();
        let f = MicroForcing::new(default_forcing(), (0.0, 1.0), g.fluid_area(), 2.0 - g.fluid_area()).unwrap();
        let c = compare_dae_vs_monolithic(&sys, &f, 50.0 * sys.dt, None).unwrap();
        max_dofs = max_dofs.max(sys.velocity.n_dofs());
        worst = worst.max(c.rel_u).max(c.rel_v);
        identity = identity.max(c.identity_defect);
        lo = lo.min(c.eig_min);
        hi = hi.max(c.eig_max);
    }
    let seconds = start.elapsed().as_secs_f64();
    // Eigenvalues are accepted up to round-off of the dense eigensolver.
    let pass = max_dofs <= 500 && worst <= 1e-6 && identity <= 1e-10 && lo >= -1e-12 && hi <= 1.0 + 1e-12 && seconds <= 60.0;
    v.report(
        6,
        pass,
        format!(
            "DAE vs monolithic over 50 steps, <= {max_dofs} velocity DOFs: max relative gap {worst:.2e}; \
             |B + C - I| = {identity:.1e}; eig(B) in [{lo:.1e}, 1 + {:.1e}]; {seconds:.1} s",
            hi - 1.0
        ),
    );
}

const CAVITY_CONFIG: &str = r#"{
  "geometry": { "family": "cavity", "params": [0.5, 0.0, 0.25], "h_cell": 0.05 },
  "material": { "lambda": 1.0, "mu": 1.0 },
  "macro": { "n_nodes": 65, "t_end": 1.0, "dt": 0.01 },
  "micro": { "eps": [0.25, 0.125, 0.0625] }
}"#;

fn criteria_7_8(v: &mut Verdicts, dir: &Path) {
    let start = Instant::now();
    let ctx = Context::new(parse_config(CAVITY_CONFIG).unwrap(), &Overrides { out: Some(dir.to_path_buf()), ..Default::default() }).unwrap();
    let mut out = Outputs::new(dir).unwrap();
    let (_, study) = run_study(&ctx, &mut out).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let columns: [(&str, fn(&poroplate::micro::ConvergenceRow) -> f64); 5] = [
        ("r_v", |r| r.monitors.r_v),
        ("r_u", |r| r.monitors.r_u),
        ("r_p", |r| r.monitors.r_p),
        ("r_w", |r| r.monitors.r_w),
        ("r_vi", |r| r.monitors.r_vi),
    ];
    let mut growth = Vec::new();
    let mut ok = seconds <= 600.0;
    for (name, col) in columns {
        let g = study.ratios(col).into_iter().fold(0.0f64, f64::max);
        ok &= g <= MONITOR_RATIO;
        growth.push(format!("{name} {g:.2}"));
    }
    v.report(7, ok, format!("max monitor growth per halving: {} (limit 2); {seconds:.1} s", growth.join(", ")));

    let errors: [(&str, fn(&poroplate::micro::ConvergenceRow) -> f64); 4] =
        [("e_p", |r| r.e_p), ("e_v", |r| r.e_v), ("e_u", |r| r.e_u), ("e_rec", |r| r.e_rec)];
    let mut ok = true;
    let mut ratios = Vec::new();
    for (name, col) in errors {
        let rs = study.ratios(col);
        ok &= rs.iter().all(|r| *r <= ERROR_RATIO);
        ratios.push(format!("{name} {rs:.3?}"));
    }
    let sanity = study.rows.iter().map(|r| r.sanity_error).fold(0.0f64, f64::max);
    ok &= sanity <= SANITY_TOL && study.rows.len() == 3;
    v.report(8, ok, format!("error ratios {} (limit 0.75); unfolding sanity {sanity:.1e} (tol 1e-10)", ratios.join(", ")));
}

const DETERMINISM_CONFIG: &str = r#"{
  "geometry": { "family": "cavity", "params": [0.5, 0.1, 0.25], "h_cell": 0.15 },
  "material": { "lambda": 2.0, "mu": 1.0 },
  "macro": { "n_nodes": 33, "t_end": 0.5, "dt": 0.02 },
  "micro": { "eps": [0.5, 0.25] }
}"#;

fn pipeline_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let spec = parse_config(DETERMINISM_CONFIG).unwrap();
    let ctx = Context::new(spec, &Overrides { out: Some(dir.to_path_buf()), ..Default::default() }).unwrap();
    for cmd in [Command::Cell, Command::Macro, Command::Micro, Command::Compare, Command::Check] {
        execute_spec(cmd, &ctx).unwrap();
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9(v: &mut Verdicts) {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = pipeline_files(a.path());
    let fb = pipeline_files(b.path());
    let differing: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let pass = fa.len() == fb.len() && differing.is_empty() && fa.len() > 10;
    v.report(9, pass, format!("{} CSV/JSON outputs of two full pipeline runs, differing: {differing:?}", fa.len()));
}

fn main() {
    let mut v = Verdicts { failed: 0 };
    let cavity = cell(&CellGeometry::cavity([0.5, 0.0], 0.25).unwrap(), 0.05);
    let channel = cell(&CellGeometry::channel(-0.3, 0.3).unwrap(), 0.05);
    criterion_1(&mut v, &cavity, &channel);
    criterion_2(&mut v, &cavity, &channel);
    criterion_3(&mut v, &cavity, &channel);
    criterion_4(&mut v);
    criterion_5(&mut v, &channel);
    criterion_6(&mut v);
    let study_dir = tempfile::tempdir().unwrap();
    criteria_7_8(&mut v, study_dir.path());
    criterion_9(&mut v);
    let _ = (&cavity.mesh, &channel.mesh);
    println!("acceptance: {} of 9 criteria failed", v.failed);
    if v.failed > 0 {
        std::process::exit(1);
    }
}
