//! Time loop driven by a [`RunConfig`]: diagnostics CSV every step, snapshots
//! at the configured cadence.

use std::path::{Path, PathBuf};

use crate::diagnostics::{energy, validate, EnergyReport, History, Tolerances, Violation};
use crate::dynamics::{step_with_info, State};
use crate::error::{Error, Result};
use crate::io::{write_snapshot, CsvWriter, RunConfig};

pub const CSV_NAME: &str = "diagnostics.csv";
pub const FINAL_SNAPSHOT: &str = "final.tfld";

pub fn snapshot_name(step: u64) -> String {
    format!("step_{step:08}.tfld")
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: u64,
    pub final_state: State,
    pub reports: Vec<EnergyReport>,
    /// Invariant violations seen during the run, with the step they occurred at.
    pub violations: Vec<(u64, Violation)>,
    pub csv: PathBuf,
}

/// Initial state for a run: the configured presets, or a resumed snapshot.
pub fn initial_state(cfg: &RunConfig, resume: Option<State>) -> Result<State> {
    let grid = cfg.grid.build()?;
    match resume {
        Some(s) => {
            grid.ensure_same(&s.grid())?;
            Ok(s)
        }
        None => cfg.initial.build(grid, &cfg.model, cfg.run.seed),
    }
}

/// Runs to `t_end`. A resumed state continues from step `round(t / dt)`.
pub fn run(cfg: &RunConfig, resume: Option<State>, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut state = initial_state(cfg, resume)?;
    log::info!(
        "viscosity contrast nu_max / nu_min = {:.4}",
        cfg.model.coeffs.viscosity_contrast()
    );
    let total = cfg.steps();
    let first = (state.t / cfg.solver.dt).round() as u64;
    let csv_path = out_dir.join(CSV_NAME);
    let mut csv = CsvWriter::create(&csv_path)?;
    let tol = Tolerances::default();

    let initial = energy(&state, &cfg.model);
    csv.row(&initial)?;
    let mut reports = vec![initial];
    let mut violations = Vec::new();
    if first == 0 {
        write_snapshot(&state, &out_dir.join(snapshot_name(0)))?;
    }
    for k in first + 1..=total {
        let (next, info) = step_with_info(&state, &cfg.solver, &cfg.model).map_err(|e| Error::Step {
            step: k,
            source: Box::new(e),
        })?;
        for w in &info.warnings {
            log::warn!("step {k}: {w}");
        }
        state = next;
        let prev = reports.last().copied().unwrap_or(initial);
        let report = energy(&state, &cfg.model).chain(&prev);
        for v in validate(
            &state,
            &cfg.model,
            &tol,
            Some(History {
                initial: &initial,
                previous: &prev,
            }),
        ) {
            log::warn!("step {k}: {}", v.message);
            violations.push((k, v));
        }
        csv.row(&report)?;
        reports.push(report);
        if k % cfg.run.output_every == 0 {
            write_snapshot(&state, &out_dir.join(snapshot_name(k)))?;
        }
    }
    csv.finish()?;
    write_snapshot(&state, &out_dir.join(FINAL_SNAPSHOT))?;
    Ok(RunSummary {
        steps: total.saturating_sub(first),
        final_state: state,
        reports,
        violations,
        csv: csv_path,
    })
}
