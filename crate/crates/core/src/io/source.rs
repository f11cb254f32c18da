use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::{read_matrix_market, GeneratorSpec, IoError};
use crate::linalg::SparseSymMatrix;

/// Where a matrix comes from: `gen:diag=v1,v2,…`, `gen:lap2d=nx,ny,shift`,
/// `gen:rand=n,density,shift[,seed]`, or `file:path.mtx` (a bare path is
/// read as a file too).
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Generated(GeneratorSpec),
    File(PathBuf),
}

impl MatrixSource {
    pub fn load(&self) -> Result<SparseSymMatrix, IoError> {
        match self {
            MatrixSource::Generated(g) => g.build(),
            MatrixSource::File(p) => read_matrix_market(p),
        }
    }

    pub fn generator(&self) -> Option<&GeneratorSpec> {
        match self {
            MatrixSource::Generated(g) => Some(g),
            MatrixSource::File(_) => None,
        }
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::Generated(g) => g.fmt(f),
            MatrixSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn numbers(what: &str, body: &str) -> Result<Vec<f64>, IoError> {
    body.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| IoError::Parse(format!("{what}: bad number {s:?}: {e}")))
        })
        .collect()
}

fn count(what: &str, v: f64) -> Result<usize, IoError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(IoError::Parse(format!("{what}: expected a nonnegative integer, got {v}")))
    }
}

impl FromStr for MatrixSource {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, IoError> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(MatrixSource::File(path.into()));
        }
        let Some(spec) = s.strip_prefix("gen:") else {
            return Ok(MatrixSource::File(s.into()));
        };
        let (kind, body) = spec
            .split_once('=')
            .ok_or_else(|| IoError::Parse(format!("generator {spec:?} needs '=' and parameters")))?;
        let g = match kind {
            "diag" => GeneratorSpec::Diag(numbers("diag", body)?),
            "lap2d" => match numbers("lap2d", body)?[..] {
                [nx, ny, shift] => GeneratorSpec::Laplacian2d {
                    nx: count("lap2d nx", nx)?,
                    ny: count("lap2d ny", ny)?,
                    shift,
                },
                _ => return Err(IoError::Parse("lap2d needs nx,ny,shift".into())),
            },
            "rand" => {
                let v = numbers("rand", body)?;
                let (n, density, shift, seed) = match v[..] {
                    [n, d, s] => (n, d, s, 0.0),
                    [n, d, s, seed] => (n, d, s, seed),
                    _ => return Err(IoError::Parse("rand needs n,density,shift[,seed]".into())),
                };
                GeneratorSpec::RandomSparseShifted {
                    n: count("rand n", n)?,
                    density,
                    shift,
                    seed: count("rand seed", seed)? as u64,
                }
            }
            other => return Err(IoError::Parse(format!("unknown generator {other:?}"))),
        };
        Ok(MatrixSource::Generated(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_form() {
        let s: MatrixSource = "gen:diag=-4,-2,-1,3".parse().unwrap();
        assert_eq!(s, MatrixSource::Generated(GeneratorSpec::Diag(vec![-4.0, -2.0, -1.0, 3.0])));
        assert_eq!(s.to_string(), "gen:diag=-4,-2,-1,3");
        let s: MatrixSource = "gen:lap2d=2,2,5".parse().unwrap();
        assert_eq!(s.to_string(), "gen:lap2d=2,2,5");
        let s: MatrixSource = "gen:rand=80,0.05,2".parse().unwrap();
        assert_eq!(s.to_string(), "gen:rand=80,0.05,2,0");
        let s: MatrixSource = "file:a/b.mtx".parse().unwrap();
        assert_eq!(s, MatrixSource::File("a/b.mtx".into()));
        assert!("gen:lap2d=2,2".parse::<MatrixSource>().is_err());
        assert!("gen:hubbard=3".parse::<MatrixSource>().is_err());
        assert!("gen:lap2d=2.5,2,0".parse::<MatrixSource>().is_err());
    }
}
