//! Command layer: configuration, orchestration of the stages
//! (cell → coefficients → macro → micro → comparison), persistence and the
//! invariant-check suite.
//!
//! Every command writes into one output directory and finishes with a
//! `manifest.json` listing each emitted file with its SHA-256, the stage
//! timings and all check outcomes. The macro stage only reads
//! `coefficients.json`, never cell data.

mod config;
mod output;

pub use config::{
    default_forcing, load_config, parse_config, DirichletEnds, GeometrySpec, MacroSpec, MaterialSpec, MicroSpec,
    RunSpec, DEFAULT_H_CELL, DEFAULT_TOL,
};
pub use output::{sha256_hex, CheckRecord, FileRecord, Outputs, RunManifest, StageRecord, ARTIFACT_VERSION};

use crate::cell::{solve_cells, verify_analytic_cells, CellSolutionSet};
use crate::effective::{check_positivity, compute_coefficients, geometric_moments, CoefficientReport, EffectiveCoefficients};
use crate::error::{CheckError, ConfigError, Error};
use crate::forcing::MacroForcing;
use crate::geometry::{LayerGeometry, PeriodicMesh};
use crate::macro_plate::{build_macro_spaces, darcy_velocity, run, MacroSpaces, MacroTrajectory};
use crate::micro::{
    compare_dae_vs_monolithic, convergence_study, exact_unfolding_pairing, sanity_field, ConvergenceStudy, MicroForcing,
    MicroRun, MicroSystem, MonitorReport, StudyInput,
};
use crate::par::Exec;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Tolerance of the closed-form cell identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Largest allowed growth of a scaled monitor per ε-halving.
pub const MONITOR_RATIO: f64 = 2.0;
/// Largest allowed ratio of consecutive convergence errors.
pub const ERROR_RATIO: f64 = 0.75;
/// Tolerance of the periodic unfolding check.
pub const SANITY_TOL: f64 = 1e-10;

/// Always reported by `check`: the normalization of the elastic plate
/// coefficients.
pub const PREFACTOR_NOTE: &str = "elastic plate coefficients a*, b*, c* are cell integrals over Z_s without a 1/|Z_s| \
     factor (the macro solver uses them as stored); the solid-averaged values are reported alongside for comparison";

/// Subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Cell,
    Macro,
    Micro,
    Compare,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Cell => "cell",
            Command::Macro => "macro",
            Command::Micro => "micro",
            Command::Compare => "compare",
            Command::Check => "check",
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
}

/// A loaded configuration together with derived run settings.
pub struct Context {
    pub spec: RunSpec,
    pub out: PathBuf,
    pub exec: Exec,
    pub config_hash: String,
    pub eps: Option<f64>,
}

impl Context {
    pub fn new(mut spec: RunSpec, ov: &Overrides) -> Result<Self, Error> {
        if let Some(t) = ov.tol {
            spec.tol = t;
        }
        spec.validate()?;
        let out = ov.out.clone().unwrap_or_else(|| PathBuf::from(&spec.output));
        let exec = if spec.parallel { Exec::default() } else { Exec::Sequential };
        let config_hash = sha256_hex(&serde_json::to_vec(&spec)?);
        Ok(Self { spec, out, exec, config_hash, eps: ov.eps })
    }
}

/// Runs a command; returns the manifest (check failures are reported in it,
/// hard errors as `Err`).
pub fn execute(cmd: Command, config: &Path, ov: &Overrides) -> Result<RunManifest, Error> {
    let ctx = Context::new(load_config(config)?, ov)?;
    execute_spec(cmd, &ctx)
}

pub fn execute_spec(cmd: Command, ctx: &Context) -> Result<RunManifest, Error> {
    let mut out = Outputs::new(&ctx.out)?;
    match cmd {
        Command::Cell => cmd_cell(ctx, &mut out)?,
        Command::Macro => cmd_macro(ctx, &mut out)?,
        Command::Micro => cmd_micro(ctx, &mut out)?,
        Command::Compare => cmd_compare(ctx, &mut out)?,
        Command::Check => cmd_check(ctx, &mut out)?,
    }
    out.finish(cmd.name(), &ctx.config_hash)
}

/// Process exit code for a finished command.
pub fn exit_code(result: &Result<RunManifest, Error>) -> i32 {
    match result {
        Ok(m) if m.passed => 0,
        Ok(_) => 2,
        Err(e) => e.exit_code(),
    }
}

// ---------------------------------------------------------------- stages

/// Cell mesh, cell solutions and coefficients.
pub struct CellStage {
    pub mesh: PeriodicMesh,
    pub cells: CellSolutionSet,
    pub report: CoefficientReport,
}

fn cell_mesh(ctx: &Context) -> Result<PeriodicMesh, Error> {
    Ok(ctx.spec.cell_geometry()?.mesh(ctx.spec.geometry.h_cell)?)
}

pub fn run_cell_stage(ctx: &Context, out: &mut Outputs) -> Result<CellStage, Error> {
    let geometry = ctx.spec.cell_geometry()?;
    let a = ctx.spec.material.tensor()?;
    let mesh = out.stage("mesh", |_| cell_mesh(ctx))?;
    let cells = out.stage("cell-problems", |_| solve_cells(&mesh, &a, ctx.exec, ctx.spec.tol))?;
    let report = out.stage("coefficients", |_| compute_coefficients(&cells, &mesh, &geometry))?;
    Ok(CellStage { mesh, cells, report })
}

fn cell_checks(stage: &CellStage, out: &mut Outputs) {
    for c in verify_analytic_cells(&stage.cells, IDENTITY_TOL) {
        out.check(CheckRecord::at_most("cell", &c.name, c.error, c.tol));
    }
    let r = &stage.report;
    let c = &r.coefficients;
    out.check(CheckRecord::at_most("coefficients", "duality", r.duality.max_defect, crate::effective::DUALITY_TOL));
    if r.positivity.alpha_degenerate {
        out.note("alpha_h = 0: the cell has no fluid/solid interface");
    } else {
        out.check(CheckRecord::above("coefficients", "alpha_h_positive", c.alpha_h, 0.0));
    }
    out.check(CheckRecord::at_most("coefficients", "alpha_h_energy", (c.alpha_h - r.alpha_energy).abs(), 1e-8));
    out.check(CheckRecord::at_most("coefficients", "k_12", c.k_full[0][1].abs(), 1e-10));
    out.check(CheckRecord::at_most("coefficients", "k_22", c.k_full[1][1].abs(), 1e-10));
    out.check(CheckRecord::at_most("coefficients", "k_flux", (c.k - r.k_flux).abs(), 1e-8));
    out.check(CheckRecord::above("coefficients", "elastic_min_eig", r.positivity.elastic_min_eig, 0.0));
    if r.positivity.k_degenerate {
        out.note("K = 0: the fluid does not percolate, no Darcy transport");
    }
    if stage.cells.n_solid_components > 1 {
        out.note(format!(
            "solid splits into {} components per cell; mean constraints are imposed per component",
            stage.cells.n_solid_components
        ));
    }
}

fn cell_fields_json(cells: &CellSolutionSet) -> serde_json::Value {
    let fields: serde_json::Map<_, _> = cells
        .problem_ids()
        .into_iter()
        .filter_map(|id| cells.field(&id).map(|f| (id, json!(f))))
        .collect();
    json!({
        "mesh_hash": cells.mesh_hash,
        "A": cells.material.voigt(),
        "fields": fields,
        "pi_1": cells.pi[0],
        "pi_2": cells.pi[1],
    })
}

fn cmd_cell(ctx: &Context, out: &mut Outputs) -> Result<(), Error> {
    let stage = run_cell_stage(ctx, out)?;
    out.json("cell_mesh.json", &stage.mesh.to_json())?;
    out.json("coefficients.json", &stage.report.coefficients)?;
    out.json("cell_fields.json", &cell_fields_json(&stage.cells))?;
    cell_checks(&stage, out);
    let identities = verify_analytic_cells(&stage.cells, IDENTITY_TOL);
    out.json(
        "cell_report.json",
        &json!({
            "identities": identities,
            "duality": stage.report.duality,
            "alpha_energy": stage.report.alpha_energy,
            "k_flux": stage.report.k_flux,
            "positivity": stage.report.positivity,
            "residuals": stage.cells.residuals,
            "energy_defects": stage.cells.energy_defects,
            "solid_components": stage.cells.n_solid_components,
            "fluid_components": stage.cells.n_fluid_components,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------- macro

fn read_coefficients(dir: &Path) -> Result<EffectiveCoefficients, Error> {
    let path = dir.join("coefficients.json");
    let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Config(ConfigError::FileNotFound(path.display().to_string())),
        _ => Error::Io(e),
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| ConfigError::SchemaViolation { path: e.path().to_string(), message: e.inner().to_string() }.into())
}

fn macro_spaces(ctx: &Context) -> Result<MacroSpaces, Error> {
    let (a, b) = ctx.spec.sigma();
    Ok(build_macro_spaces(a, b, ctx.spec.macro_.n_nodes, ctx.spec.sides()?)?)
}

fn run_macro(ctx: &Context, c: &EffectiveCoefficients, forcing: &MacroForcing) -> Result<(MacroSpaces, MacroTrajectory), Error> {
    let sp = macro_spaces(ctx)?;
    let tr = run(c, &sp, forcing, ctx.spec.macro_.t_end, ctx.spec.macro_.dt(), ctx.spec.tol)?;
    Ok((sp, tr))
}

fn write_macro(out: &mut Outputs, sp: &MacroSpaces, c: &EffectiveCoefficients, tr: &MacroTrajectory, f: &MacroForcing) -> Result<(), Error> {
    let energy: Vec<Vec<f64>> = tr
        .steps
        .iter()
        .enumerate()
        .map(|(k, s)| vec![k as f64, s.state.t, s.energy, s.dissipation, f64::from(u8::from(s.loaded))])
        .collect();
    out.csv("macro_energy.csv", &["step", "t", "energy", "dissipation", "loaded"], &energy)?;
    let mut fields = Vec::new();
    for s in tr.states() {
        for i in 0..sp.mesh.n {
            let x = sp.mesh.x(i);
            let m = sp.eval(s, x);
            fields.push(vec![s.t, x, m.p, m.u, m.w, m.dw]);
        }
    }
    out.csv("macro_fields.csv", &["t", "x", "p0", "u1", "w", "dw"], &fields)?;
    let n = tr.steps.len();
    let prev = &tr.steps[n.saturating_sub(2)].state;
    let last = tr.final_state();
    let darcy: Vec<Vec<f64>> = darcy_velocity(sp, c, prev, last, f).into_iter().map(|r| r.to_vec()).collect();
    out.csv("darcy_velocity.csv", &["x", "w1", "w2"], &darcy)?;
    out.json(
        "macro_final.json",
        &json!({
            "t": last.t,
            "x": (0..sp.mesh.n).map(|i| sp.mesh.x(i)).collect::<Vec<_>>(),
            "p0": (0..sp.mesh.n).map(|i| sp.eval(last, sp.mesh.x(i)).p).collect::<Vec<_>>(),
            "u1": (0..sp.mesh.n).map(|i| sp.eval(last, sp.mesh.x(i)).u).collect::<Vec<_>>(),
            "w": (0..sp.mesh.n).map(|i| sp.eval(last, sp.mesh.x(i)).w).collect::<Vec<_>>(),
            "max_abs": last.max_abs(),
            "transpose_defect": tr.transpose_defect,
        }),
    )
}

fn macro_checks(out: &mut Outputs, tr: &MacroTrajectory, forcing: &MacroForcing, suite: &str) {
    out.check(CheckRecord::at_most(suite, "transpose_defect", tr.transpose_defect, 1e-12));
    let mut worst = 0.0f64;
    let mut free = 0usize;
    for w in tr.steps.windows(2) {
        if !w[1].loaded {
            free += 1;
            worst = worst.max(w[1].energy - w[0].energy * (1.0 + crate::macro_plate::ENERGY_TOL));
        }
    }
    if free > 0 {
        out.check(CheckRecord::at_most(suite, "energy_increase_on_free_steps", worst, 0.0));
    }
    if *forcing == MacroForcing::zero() {
        let m = tr.states().fold(0.0f64, |m, s| m.max(s.max_abs()));
        out.check(CheckRecord::at_most(suite, "zero_forcing_zero_solution", m, 0.0));
    }
}

fn cmd_macro(ctx: &Context, out: &mut Outputs) -> Result<(), Error> {
    let c = read_coefficients(&ctx.out)?;
    let f = ctx.spec.forcing;
    let (sp, tr) = out.stage("macro", |_| run_macro(ctx, &c, &f))?;
    write_macro(out, &sp, &c, &tr, &f)?;
    macro_checks(out, &tr, &f, "macro");
    Ok(())
}

// ---------------------------------------------------------------- micro

fn micro_forcing(ctx: &Context, vol_f: f64, vol_s: f64) -> Result<MicroForcing, Error> {
    if let Some(f) = ctx.spec.micro.forcing {
        if f != ctx.spec.forcing {
            return Err(CheckError::InconsistentData("micro.forcing differs from the macro forcing".into()).into());
        }
    }
    Ok(MicroForcing::new(ctx.spec.forcing, ctx.spec.sigma(), vol_f, vol_s)?)
}

fn eps_tag(eps: f64) -> String {
    format!("{eps}")
}

fn micro_level(ctx: &Context, mesh: &PeriodicMesh, forcing: &MicroForcing, eps: f64) -> Result<(MicroSystem, MicroRun), Error> {
    let a = ctx.spec.material.tensor()?;
    let layer = LayerGeometry::extrude(mesh, ctx.spec.sigma(), eps, ctx.spec.sides()?)?;
    let sys = MicroSystem::new(&layer, &a, ctx.spec.micro_dt(), ctx.spec.tol, ctx.exec)?;
    let run = sys.run_with(forcing, ctx.spec.macro_.t_end, |_, _| Ok(()))?;
    Ok((sys, run))
}

fn monitor_row(m: &MonitorReport) -> Vec<f64> {
    vec![m.epsilon, m.r_v, m.r_u, m.r_p, m.r_w, m.r_vi]
}

const MONITOR_HEADER: [&str; 6] = ["epsilon", "r_v", "r_u", "r_p", "r_w", "r_vi"];

fn monitor_checks(out: &mut Outputs, reports: &[MonitorReport], suite: &str) {
    if reports.len() < 2 {
        out.note("monitor growth needs at least two periods; only the table was written".to_string());
    }
    for w in reports.windows(2) {
        let pairs = [
            ("r_v", w[0].r_v, w[1].r_v),
            ("r_u", w[0].r_u, w[1].r_u),
            ("r_p", w[0].r_p, w[1].r_p),
            ("r_w", w[0].r_w, w[1].r_w),
            ("r_vi", w[0].r_vi, w[1].r_vi),
        ];
        for (name, a, b) in pairs {
            let ratio = if a == 0.0 && b == 0.0 { 1.0 } else { b / a };
            out.check(CheckRecord::at_most(suite, &format!("{name}_growth_eps_{}", eps_tag(w[1].epsilon)), ratio, MONITOR_RATIO));
        }
    }
}

fn cmd_micro(ctx: &Context, out: &mut Outputs) -> Result<(), Error> {
    let list = &ctx.spec.micro.eps;
    let levels: Vec<f64> = match ctx.eps {
        Some(e) => {
            if !list.iter().any(|v| (v - e).abs() <= 1e-12 * v.abs()) {
                return Err(ConfigError::Invalid(format!("epsilon {e} is not in micro.eps {list:?}")).into());
            }
            vec![e]
        }
        None => list.clone(),
    };
    let mesh = out.stage("mesh", |_| cell_mesh(ctx))?;
    let mo = geometric_moments(&mesh);
    let forcing = micro_forcing(ctx, mo.vol_f, mo.vol_s)?;
    let mut reports = Vec::new();
    for eps in levels {
        let (sys, run) = out.stage(&format!("micro eps={}", eps_tag(eps)), |_| micro_level(ctx, &mesh, &forcing, eps))?;
        let tag = eps_tag(eps);
        let rows: Vec<Vec<f64>> =
            run.log.iter().map(|l| vec![l.t, l.dv, l.du, l.p, l.w, l.v1, l.elastic_energy]).collect();
        out.csv(&format!("micro_eps{tag}_norms.csv"), &["t", "dv", "du", "p", "w_rel", "v1", "elastic_energy"], &rows)?;
        let s = &run.final_state;
        let mut field = sys.layer.mesh.to_json(&[]);
        field["epsilon"] = json!(eps);
        field["t"] = json!(s.t);
        field["u"] = json!(sys.velocity.to_nodal_vec(&s.u));
        field["v"] = json!(sys.velocity.to_nodal_vec(&s.w));
        field["p"] = json!(sys.pressure.to_nodal(&s.p));
        out.json(&format!("micro_eps{tag}_final.json"), &field)?;
        reports.push(run.monitors);
    }
    let rows: Vec<Vec<f64>> = reports.iter().map(monitor_row).collect();
    out.csv("monitors.csv", &MONITOR_HEADER, &rows)?;
    monitor_checks(out, &reports, "monitors");
    Ok(())
}

// ---------------------------------------------------------------- compare

/// Runs the full chain and the ε-study.
pub fn run_study(ctx: &Context, out: &mut Outputs) -> Result<(CellStage, ConvergenceStudy), Error> {
    let stage = run_cell_stage(ctx, out)?;
    let c = stage.report.coefficients.clone();
    micro_forcing(ctx, c.vol_f, c.vol_s)?;
    if ctx.spec.micro_dt() != ctx.spec.macro_.dt() {
        return Err(CheckError::InconsistentData(format!(
            "micro.dt = {} differs from macro dt = {}; the comparison needs a common time grid",
            ctx.spec.micro_dt(),
            ctx.spec.macro_.dt()
        ))
        .into());
    }
    let f = ctx.spec.forcing;
    let (sp, tr) = out.stage("macro", |_| run_macro(ctx, &c, &f))?;
    let a = ctx.spec.material.tensor()?;
    let input = StudyInput {
        cell_mesh: &stage.mesh,
        cells: &stage.cells,
        coeffs: &c,
        material: &a,
        spaces: &sp,
        macro_run: &tr,
        forcing: &f,
        tol: ctx.spec.tol,
        exec: ctx.exec,
    };
    let study = out.stage("micro-study", |_| convergence_study(&ctx.spec.micro.eps, &input))?;
    Ok((stage, study))
}

fn study_checks(out: &mut Outputs, study: &ConvergenceStudy) {
    for r in &study.rows {
        out.check(CheckRecord::at_most("two-scale", &format!("sanity_eps_{}", eps_tag(r.epsilon)), r.sanity_error, SANITY_TOL));
    }
    if study.rows.len() < 2 {
        out.note("single epsilon level: trend checks skipped");
        return;
    }
    let reports: Vec<MonitorReport> = study.rows.iter().map(|r| r.monitors).collect();
    monitor_checks(out, &reports, "monitors");
    for w in study.rows.windows(2) {
        for (name, a, b) in [("e_p", w[0].e_p, w[1].e_p), ("e_v", w[0].e_v, w[1].e_v), ("e_u", w[0].e_u, w[1].e_u), ("e_rec", w[0].e_rec, w[1].e_rec)] {
            let ratio = if a == 0.0 && b == 0.0 { 0.0 } else { b / a };
            out.check(CheckRecord::at_most("two-scale", &format!("{name}_ratio_eps_{}", eps_tag(w[1].epsilon)), ratio, ERROR_RATIO));
        }
    }
}

fn cmd_compare(ctx: &Context, out: &mut Outputs) -> Result<(), Error> {
    let (stage, study) = run_study(ctx, out)?;
    out.json("coefficients.json", &stage.report.coefficients)?;
    let rows: Vec<Vec<f64>> = study
        .rows
        .iter()
        .map(|r| {
            let m = &r.monitors;
            vec![r.epsilon, m.r_v, m.r_u, m.r_p, m.r_w, r.e_p, r.e_v, r.e_u, r.e_rec, m.r_vi, r.sanity_error]
        })
        .collect();
    out.csv(
        "convergence.csv",
        &["epsilon", "r_v", "r_u", "r_p", "r_w", "e_p", "e_v", "e_u", "e_rec", "r_vi", "sanity"],
        &rows,
    )?;
    out.json("convergence.json", &study)?;
    study_checks(out, &study);
    Ok(())
}

// ---------------------------------------------------------------- check

/// Coarse layer for the reduced-basis comparison: two cells and a coarse
/// cell mesh keep the dense problem small.
fn dae_check(ctx: &Context, out: &mut Outputs, vol_f: f64, vol_s: f64) -> Result<(), Error> {
    let geometry = ctx.spec.cell_geometry()?;
    let a = ctx.spec.material.tensor()?;
    let (lo, hi) = ctx.spec.sigma();
    let eps = (hi - lo) / 2.0;
    let forcing = micro_forcing(ctx, vol_f, vol_s)?;
    let mut h = 0.5;
    let sys = loop {
        let mesh = geometry.mesh(h)?;
        let layer = LayerGeometry::extrude(&mesh, ctx.spec.sigma(), eps, ctx.spec.sides()?)?;
        let sys = MicroSystem::new(&layer, &a, ctx.spec.micro_dt(), ctx.spec.tol, ctx.exec)?;
        if sys.velocity.n_dofs() <= 500 || h > 1.0 {
            break sys;
        }
        h *= 1.25;
    };
    let t_end = 50.0 * sys.dt;
    let cmp = compare_dae_vs_monolithic(&sys, &forcing, t_end, None)?;
    out.check(CheckRecord::at_most("dae", "velocity_dofs", sys.velocity.n_dofs() as f64, 500.0));
    out.check(CheckRecord::at_most("dae", "rel_u", cmp.rel_u, 1e-6));
    out.check(CheckRecord::at_most("dae", "rel_v", cmp.rel_v, 1e-6));
    out.check(CheckRecord::at_most("dae", "b_plus_c_identity", cmp.identity_defect, 1e-10));
    out.check(CheckRecord::at_most("dae", "h_orthonormality", cmp.orthonormality_defect, 1e-10));
    out.check(CheckRecord::holds("dae", "eigenvalues_in_unit_interval", cmp.eig_min >= -1e-12 && cmp.eig_max <= 1.0 + 1e-12));
    out.json("dae_report.json", &json!({
        "dimension": cmp.dimension, "rank": cmp.rank, "rel_u": cmp.rel_u, "rel_v": cmp.rel_v,
        "identity_defect": cmp.identity_defect, "orthonormality_defect": cmp.orthonormality_defect,
        "eig_min": cmp.eig_min, "eig_max": cmp.eig_max, "velocity_dofs": sys.velocity.n_dofs(),
    }))
}

fn micro_checks(ctx: &Context, out: &mut Outputs, stage: &CellStage) -> Result<(), Error> {
    let c = &stage.report.coefficients;
    let forcing = micro_forcing(ctx, c.vol_f, c.vol_s)?;
    let a = ctx.spec.material.tensor()?;
    let eps = ctx.spec.micro.eps[0];
    let layer = LayerGeometry::extrude(&stage.mesh, ctx.spec.sigma(), eps, ctx.spec.sides()?)?;
    let sys = MicroSystem::new(&layer, &a, ctx.spec.micro_dt(), ctx.spec.tol, ctx.exec)?;
    out.check(CheckRecord::at_most("micro", "system_asymmetry", sys.system.asymmetry(), 1e-12 * sys.system.max_abs()));
    let t_end = 10.0 * sys.dt;
    let zero = MicroForcing::new(MacroForcing::zero(), ctx.spec.sigma(), c.vol_f, c.vol_s)?;
    let z = sys.run_with(&zero, t_end, |_, _| Ok(()))?;
    let zmax = [z.monitors.r_v, z.monitors.r_u, z.monitors.r_p, z.monitors.r_w, z.monitors.r_vi]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    out.check(CheckRecord::at_most("micro", "zero_forcing_zero_monitors", zmax, 0.0));
    let one = sys.run_with(&forcing, t_end, |_, _| Ok(()))?.monitors;
    let two = sys.run_with(&forcing.scaled(2.0), t_end, |_, _| Ok(()))?.monitors;
    let lin = [(one.r_v, two.r_v), (one.r_u, two.r_u), (one.r_p, two.r_p), (one.r_w, two.r_w), (one.r_vi, two.r_vi)]
        .iter()
        .map(|(a, b)| if *a == 0.0 { b.abs() } else { (b / a - 2.0).abs() })
        .fold(0.0f64, f64::max);
    out.check(CheckRecord::at_most("micro", "linearity", lin, 1e-8));
    let psi = sanity_field(&stage.cells.fe);
    for &e in &ctx.spec.micro.eps {
        let layer = LayerGeometry::extrude(&stage.mesh, ctx.spec.sigma(), e, ctx.spec.sides()?)?;
        let fe = crate::fem::FeMesh::new(&layer.mesh);
        let (pair, exact) = exact_unfolding_pairing(&layer, &fe, &stage.cells.fe, &psi);
        out.check(CheckRecord::at_most("two-scale", &format!("sanity_eps_{}", eps_tag(e)), (pair - exact).abs(), SANITY_TOL));
    }
    Ok(())
}

fn cmd_check(ctx: &Context, out: &mut Outputs) -> Result<(), Error> {
    out.note(PREFACTOR_NOTE);
    let stage = run_cell_stage(ctx, out)?;
    cell_checks(&stage, out);
    let fresh = stage.report.coefficients.clone();
    // A coefficients file produced earlier in the output directory is
    // validated too, since the macro stage consumes it.
    let stored = ctx.out.join("coefficients.json");
    if stored.exists() {
        let c = read_coefficients(&ctx.out)?;
        let positivity = check_positivity(&c);
        out.check(CheckRecord::holds("coefficients", "stored_positivity", positivity.is_ok()));
        if let Err(e) = positivity {
            out.note(format!("stored coefficients: {e}"));
        }
        out.check(CheckRecord::holds("coefficients", "stored_matches_recomputed", c == fresh));
    }
    let suite = "macro";
    let sp = macro_spaces(ctx)?;
    let t_end = ctx.spec.macro_.t_end;
    let dt = ctx.spec.macro_.dt();
    let zero = run(&fresh, &sp, &MacroForcing::zero(), t_end, dt, ctx.spec.tol)?;
    macro_checks(out, &zero, &MacroForcing::zero(), suite);
    let cut = ctx.spec.forcing.with_cutoff(t_end);
    let decay = out.stage("macro", |_| run(&fresh, &sp, &cut, 2.0 * t_end, dt, ctx.spec.tol))?;
    macro_checks(out, &decay, &cut, suite);
    out.stage("dae", |o| dae_check(ctx, o, fresh.vol_f, fresh.vol_s))?;
    out.stage("micro", |o| micro_checks(ctx, o, &stage))?;
    let report = json!({
        "checks": out.checks,
        "notes": out.notes,
        "passed": out.passed(),
    });
    out.json("check_report.json", &report)
}
