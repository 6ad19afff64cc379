//! TOML run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::initial::InitialSpec;
use crate::dynamics::SolverConfig;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ops::Grid2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
}

fn one() -> f64 {
    1.0
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny, self.lx, self.ly)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t_end: f64,
    /// Snapshot cadence in steps; the CSV gets a row every step.
    #[serde(default = "default_cadence")]
    pub output_every: u64,
    #[serde(default = "default_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_cadence() -> u64 {
    10
}

fn default_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub solver: SolverConfig,
    pub run: RunSpec,
    pub initial: InitialSpec,
}

impl RunConfig {
    /// Number of steps to reach `t_end` (the last step may overshoot by rounding).
    pub fn steps(&self) -> u64 {
        (self.run.t_end / self.solver.dt - 1e-9).ceil().max(1.0) as u64
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.model.validate()?;
        self.solver.validate()?;
        self.initial.phi.validate()?;
        if !(self.run.t_end > 0.0 && self.run.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.run.t_end)));
        }
        if self.run.output_every == 0 {
            return Err(Error::InvalidParameter("output_every must be at least 1".into()));
        }
        let limit = 1.0 - self.model.potential.xi;
        if self.initial.phi.bound() > limit {
            return Err(Error::InvalidParameter(format!(
                "initial phi preset reaches {} but max |phi0| <= 1 - xi = {limit} is required",
                self.initial.phi.bound()
            )));
        }
        Ok(())
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line whose key (before `=`) is one of `keys`; 0 when none matches.
fn line_of_key(text: &str, keys: &[&str]) -> usize {
    text.lines()
        .position(|l| {
            let k = l.split('=').next().unwrap_or("").trim();
            keys.contains(&k) && l.contains('=')
        })
        .map_or(0, |i| i + 1)
}

fn keys_for(message: &str) -> &'static [&'static str] {
    const TABLE: &[(&str, &[&str])] = &[
        ("initial phi", &["amplitude", "value", "mean", "phi"]),
        ("theta", &["theta0", "theta"]),
        ("xi", &["xi"]),
        ("gamma", &["gamma"]),
        ("interface width", &["width"]),
        ("blob radius", &["radius"]),
        ("t_end", &["t_end"]),
        ("output_every", &["output_every"]),
        ("dt", &["dt"]),
        ("filter", &["alpha_filter", "filter_passes"]),
        ("linear", &["tol"]),
        ("nu", &["nu1", "nu2"]),
        ("lambda", &["star", "slope", "c0", "c1", "c2", "nodes", "values"]),
        ("k_", &["k_star", "k_slope"]),
        ("sigma", &["sigma"]),
        ("grid", &["nx", "ny", "lx", "ly"]),
    ];
    TABLE
        .iter()
        .find(|(needle, _)| message.contains(needle))
        .map_or(&[], |(_, keys)| keys)
}

/// Parses and validates a configuration; errors carry the offending line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate().map_err(|e| {
        let message = match e {
            Error::InvalidParameter(m) | Error::GridMismatch(m) => m,
            other => other.to_string(),
        };
        Error::Config {
            line: line_of_key(text, keys_for(&message)),
            message,
        }
    })?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
nx = 16
ny = 16

[run]
t_end = 0.001

[initial]
phi = { preset = "constant", value = 0.0 }
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.model.potential.theta, 1.0);
        assert_eq!(c.model.potential.theta0, 2.0);
        assert_eq!(c.model.coeffs.nu1, 1.0);
        assert_eq!(c.model.coeffs.nu2, 1.5);
        assert_eq!(c.steps(), 10);
    }

    #[test]
    fn theta_ordering_is_enforced() {
        let text = format!("{MINIMAL}\n[model.potential]\ntheta0 = 0.5\n");
        let e = parse_config(&text).unwrap_err();
        assert!(e.to_string().contains("requires theta < theta0"), "{e}");
        match e {
            Error::Config { line, .. } => assert_eq!(line, 13),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preset_amplitude_above_one_is_rejected() {
        let text = MINIMAL.replace(
            r#"{ preset = "constant", value = 0.0 }"#,
            r#"{ preset = "cosine_mode", amplitude = 1.2 }"#,
        );
        let e = parse_config(&text).unwrap_err();
        assert!(matches!(e, Error::Config { line: 10, .. }), "{e:?}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = MINIMAL.replace("ny = 16", "ny = 16\nnz = 4");
        match parse_config(&text).unwrap_err() {
            Error::Config { line, message } => {
                assert_eq!(line, 5, "{message}");
                assert!(message.contains("nz"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_is_config_error() {
        let text = MINIMAL.replace("nx = 16", "nx = \"sixteen\"");
        assert!(matches!(parse_config(&text), Err(Error::Config { line: 3, .. })));
    }
}
