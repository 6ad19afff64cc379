//! Command-line surface.
//!
//! Exit codes: 0 ok, 2 usage, 3 config or invalid parameter, 4 solver failure
//! or invariant violation found by `check`, 5 io or snapshot format. Failures
//! print a single line `error kind=<kind> code=<code> message=<message>` on stderr.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::diagnostics::{energy, validate, Tolerances};
use crate::error::{Error, Result};
use crate::io::{load_config, read_snapshot};
use crate::model::ModelParams;
use crate::verification::{
    cascade_study, manufactured_solution_study, manufactured_temporal_study, CascadeScenario, Subproblem,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "thrombus", version, about = "Phase-field thrombus/blood flow solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configuration to t_end.
    Run {
        config: PathBuf,
        /// Continue from a snapshot written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Overrides `run.output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Validate a snapshot against the state invariants.
    Check {
        snapshot: PathBuf,
        /// Model parameters for the energy checks; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Manufactured-solution refinement study; prints the order table as CSV.
    Convergence {
        #[arg(long, default_value = "heat")]
        subproblem: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Refine the time step instead of the mesh.
        #[arg(long)]
        temporal: bool,
    },
    /// Regularization study on the initial data of a configuration.
    Cascade {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025])]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4])]
        xis: Vec<f64>,
        /// Horizon; defaults to `run.t_end`.
        #[arg(long)]
        t_end: Option<f64>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        "config" | "invalid" => EXIT_CONFIG,
        "solver" => EXIT_SOLVER,
        _ => EXIT_IO,
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run {
            config,
            resume,
            output_dir,
        } => {
            let cfg = load_config(&config)?;
            let resume = resume.map(|p| read_snapshot(&p)).transpose()?;
            let dir = output_dir.unwrap_or_else(|| cfg.run.output_dir.clone());
            let summary = crate::runner::run(&cfg, resume, &dir)?;
            println!(
                "steps={} t={:e} violations={} csv={}",
                summary.steps,
                summary.final_state.t,
                summary.violations.len(),
                summary.csv.display()
            );
            Ok(EXIT_OK)
        }
        Command::Check { snapshot, config } => {
            let params = match config {
                Some(p) => load_config(&p)?.model,
                None => ModelParams::default(),
            };
            let state = read_snapshot(&snapshot)?;
            let found = validate(&state, &params, &Tolerances::default(), None);
            for v in &found {
                let loc = v.location.map_or("-".to_string(), |(i, j)| format!("{i},{j}"));
                println!("violation kind={:?} field={} location={loc} value={:e} message={}", v.kind, v.field, v.value, v.message);
            }
            if found.is_empty() {
                println!("ok {}", energy(&state, &params).csv_row());
                Ok(EXIT_OK)
            } else {
                eprintln!("error kind=invariant code={EXIT_SOLVER} message={} violation(s)", found.len());
                Ok(EXIT_SOLVER)
            }
        }
        Command::Convergence {
            subproblem,
            levels,
            temporal,
        } => {
            let sub: Subproblem = subproblem.parse()?;
            let table = if temporal {
                manufactured_temporal_study(sub, levels)?
            } else {
                manufactured_solution_study(sub, levels)?
            };
            print!("{}", table.to_csv());
            println!("# order_l2={:.4} order_inf={:.4}", table.order_l2, table.order_inf);
            Ok(EXIT_OK)
        }
        Command::Cascade {
            config,
            alphas,
            xis,
            t_end,
        } => {
            let cfg = load_config(&config)?;
            let scenario = CascadeScenario {
                initial: crate::runner::initial_state(&cfg, None)?,
                config: cfg.solver.clone(),
                params: cfg.model.clone(),
                t_end: t_end.unwrap_or(cfg.run.t_end),
            };
            let report = cascade_study(&scenario, &alphas, &xis)?;
            print!("{}", report.to_csv());
            println!("# alpha_monotone={} max_abs_phi={:e}", report.alpha_monotone(), report.max_abs_phi);
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("usage error");
            eprintln!("error kind=usage code={EXIT_USAGE} message={}", one_line(first));
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error kind={} code={code} message={}", e.kind(), one_line(&e.to_string()));
            code
        }
    }
}
