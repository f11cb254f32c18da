use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::IoError;
use crate::engine::{Outcome, SolverConfig, TraceRecord};
use crate::theory::MonitorReport;

/// Everything about one solve, for JSON output. Non-finite numbers are
/// written as `null`.
#[derive(Debug, Clone, Serialize)]
pub struct RunArchive {
    pub config: SolverConfig,
    pub matrix_source: String,
    pub alpha: f64,
    pub iterations: usize,
    pub outcome: Outcome,
    pub eigenvalue_estimates: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub monitors: Vec<MonitorReport>,
    pub wall_time: f64,
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| IoError::io(path, e))
}
