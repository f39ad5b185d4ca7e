use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn coarse() -> Value {
    json!({
        "geometry": { "family": "cavity", "params": [0.5, 0.0, 0.25], "h_cell": 0.3 },
        "material": { "lambda": 1.0, "mu": 1.0 },
        "macro": { "n_nodes": 17, "t_end": 0.2, "dt": 0.02 },
        "micro": { "eps": [0.5] }
    })
}

fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let p = dir.join("run.json");
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poroplate"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn cell_then_macro_succeeds_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse());
    let out = dir.path().join("out");
    let o = run(&["cell"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["coefficients.json", "cell_mesh.json", "cell_report.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = run(&["macro"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let energy = std::fs::read_to_string(out.join("macro_energy.csv")).unwrap();
    assert_eq!(energy.lines().count(), 1 + 11);
}

#[test]
fn macro_without_coefficients_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse());
    let o = run(&["macro"], &cfg, &dir.path().join("empty"));
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("coefficients.json"));
}

#[test]
fn invalid_inputs_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["cell"], &dir.path().join("missing.json"), &out)), 3);

    let mut unknown = coarse();
    unknown["geometry"]["radius"] = json!(0.2);
    assert_eq!(code(&run(&["cell"], &write_config(dir.path(), &unknown), &out)), 3);

    let mut bad = coarse();
    bad["material"]["mu"] = json!(-1.0);
    assert_eq!(code(&run(&["cell"], &write_config(dir.path(), &bad), &out)), 3);

    std::fs::write(dir.path().join("run.json"), "{ not json").unwrap();
    assert_eq!(code(&run(&["cell"], &dir.path().join("run.json"), &out)), 3);

    let cfg = write_config(dir.path(), &coarse());
    assert_eq!(code(&run(&["micro", "--eps", "0.3"], &cfg, &out)), 3);
    assert_eq!(code(&run(&["frobnicate"], &cfg, &out)), 3);
}

#[test]
fn corrupted_stored_coefficients_fail_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse());
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["cell"], &cfg, &out)), 0);
    let path = out.join("coefficients.json");
    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    c["c_star"] = json!(0.0);
    std::fs::write(&path, serde_json::to_string(&c).unwrap()).unwrap();
    let o = run(&["check"], &cfg, &out);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stored"));
}

#[test]
fn mismatched_micro_forcing_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = coarse();
    v["micro"]["forcing"] = json!({ "f0": { "family": "zero" } });
    let o = run(&["compare"], &write_config(dir.path(), &v), &dir.path().join("out"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("forcing"));
}

#[test]
fn micro_writes_monitor_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse());
    let out = dir.path().join("out");
    let o = run(&["micro", "--eps", "0.5"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let monitors = std::fs::read_to_string(out.join("monitors.csv")).unwrap();
    let header = monitors.lines().next().unwrap();
    for col in ["epsilon", "r_v", "r_u", "r_p", "r_w", "r_vi"] {
        assert!(header.split(',').any(|c| c == col), "{header}");
    }
    assert_eq!(monitors.lines().count(), 2);
}

#[test]
fn single_period_compare_reports_table_and_note() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse());
    let out = dir.path().join("out");
    let o = run(&["compare"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("note:"));
    let table = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(table.starts_with("epsilon,"));
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &coarse());
    let files = |name: &str| {
        let out = dir.path().join(name);
        for cmd in ["cell", "macro", "compare"] {
            assert_eq!(code(&run(&[cmd], &cfg, &out)), 0);
        }
        let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap() != "manifest.json")
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        v.sort();
        v
    };
    assert_eq!(files("a"), files("b"));
}
