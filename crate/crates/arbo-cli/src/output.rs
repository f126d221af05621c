//! Bit-stable CSV and JSON emission.

use std::fs;
use std::path::{Path, PathBuf};

use arbo::ode::Trajectory;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Version tag written into every JSON report.
pub const REPORT_VERSION: &str = "1.0";

/// Round-trip decimal with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Output directory, created on demand.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    /// Creates the directory if needed.
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io { path: root.display().to_string(), source })?;
        Ok(Self { root: root.to_path_buf() })
    }

    /// Path of a file inside the directory.
    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes a CSV file from a header and string rows.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }

    /// Writes a trajectory with a leading time column.
    pub fn write_trajectory<const D: usize>(
        &self,
        name: &str,
        columns: &[&str; D],
        traj: &Trajectory<D>,
    ) -> Result<PathBuf, CliError> {
        let mut header = vec!["t"];
        header.extend_from_slice(columns);
        let rows: Vec<Vec<String>> = traj
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| std::iter::once(traj.grid.t(i)).chain(v.iter().copied()).map(fmt_f64).collect())
            .collect();
        self.write_csv(name, &header, &rows)
    }

    /// Writes a versioned JSON report and returns it.
    pub fn write_report<T: Serialize>(&self, name: &str, command: &str, result: &T) -> Result<Value, CliError> {
        let value = json!({ "spec_version": REPORT_VERSION, "command": command, "result": result });
        let path = self.path(name);
        let text = serde_json::to_string_pretty(&value)?;
        fs::write(&path, text + "\n").map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Ok(value)
    }
}
