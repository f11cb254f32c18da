//! Matrix Market files, synthetic generators, matrix sources, trace CSVs and
//! JSON archives.

mod archive;
mod generate;
mod mtx;
mod source;
mod trace_csv;

pub use archive::{write_json, RunArchive};
pub use generate::{gen_diag, gen_laplacian2d, gen_random_sparse_shifted, laplacian2d_eigenvalues, GeneratorSpec};
pub use mtx::{parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to};
pub use source::MatrixSource;
pub use trace_csv::{read_trace_csv, trace_csv_header, write_trace_csv, write_trace_csv_to};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}, line {line}: {message}")]
    Format {
        context: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Shortest decimal that parses back to the same `f64`; exponent form
/// outside `[1e-5, 1e16)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::format_f64;

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, -2.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 1.0 / 3.0, -0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(1e-300), "1e-300");
        assert_eq!(format_f64(f64::NAN), "NaN");
    }
}
