//! Configuration, initial data, snapshots and time-series output.

pub mod config;
pub mod initial;
pub mod snapshot;

use std::io::Write;
use std::path::Path;

use crate::diagnostics::{EnergyReport, CSV_HEADER};
use crate::error::{Error, Result};

pub use config::{load_config, parse_config, GridSpec, RunConfig, RunSpec};
pub use initial::{InitialSpec, Orientation, PhiPreset, PsiPreset, VelocityPreset};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot};

/// Diagnostics CSV with a fixed header row.
pub struct CsvWriter {
    out: std::io::BufWriter<std::fs::File>,
    path: std::path::PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self {
            out: std::io::BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.line(CSV_HEADER)?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn row(&mut self, r: &EnergyReport) -> Result<()> {
        self.line(&r.csv_row())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
