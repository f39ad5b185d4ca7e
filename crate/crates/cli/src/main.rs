//! `poroplate` command-line driver.
//!
//! Exit codes: 0 all checks passed, 2 a check failed, 3 invalid input,
//! 4 solver failure.

use clap::{Args, Parser, Subcommand};
use poroplate::pipeline::{execute, exit_code, Command, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "poroplate", version, about = "Thin periodic poroelastic layers: cell problems, effective plate coefficients, macro and micro solvers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the cell problems and write the effective coefficients.
    Cell(Opts),
    /// Run the macroscopic plate model from stored coefficients.
    Macro(Opts),
    /// Run the resolved microscopic model for one or all periods.
    Micro(Opts),
    /// Full chain and convergence study over the configured periods.
    Compare(Opts),
    /// Run the invariant-check suites.
    Check(Opts),
}

#[derive(Args)]
struct Opts {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configured one).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single period for `micro`; must be one of the configured values.
    #[arg(long)]
    eps: Option<f64>,
    /// Relative solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (cmd, opts) = match cli.command {
        Cmd::Cell(o) => (Command::Cell, o),
        Cmd::Macro(o) => (Command::Macro, o),
        Cmd::Micro(o) => (Command::Micro, o),
        Cmd::Compare(o) => (Command::Compare, o),
        Cmd::Check(o) => (Command::Check, o),
    };
    let ov = Overrides { out: opts.out, eps: opts.eps, tol: opts.tol };
    let result = execute(cmd, &opts.config, &ov);
    match &result {
        Ok(m) => {
            for c in m.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}/{}: {:e} (limit {:e})", c.suite, c.name, c.value, c.limit);
            }
            for n in &m.notes {
                eprintln!("note: {n}");
            }
            let failed = m.checks.iter().filter(|c| !c.pass).count();
            println!("{}: {} checks, {} failed", m.command, m.checks.len(), failed);
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
