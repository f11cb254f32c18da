use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{format_f64, IoError};
use crate::linalg::{LinalgError, SparseSymMatrix};

/// Reads a `coordinate real symmetric` Matrix Market file. Integer fields
/// are accepted as real. Entries may sit in either triangle; an unordered
/// pair given twice is rejected.
pub fn read_matrix_market(path: &Path) -> Result<SparseSymMatrix, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    parse_matrix_market(BufReader::new(file), &path.display().to_string())
}

pub fn parse_matrix_market<R: BufRead>(reader: R, context: &str) -> Result<SparseSymMatrix, IoError> {
    let fail = |line: usize, message: String| IoError::Format {
        context: context.to_string(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    let header = header.map_err(|e| fail(1, e.to_string()))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(fail(1, format!("not a Matrix Market header: {header:?}")));
    }
    if words[2] != "coordinate" {
        return Err(fail(1, format!("unsupported storage {:?}, need coordinate", words[2])));
    }
    if words[3] != "real" && words[3] != "integer" {
        return Err(fail(1, format!("unsupported field {:?}, need real", words[3])));
    }
    if words[4] != "symmetric" {
        return Err(fail(1, format!("symmetry {:?} declared, need symmetric", words[4])));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| fail(lineno, e.to_string()))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match size {
            None => {
                let nums: Vec<usize> = fields
                    .iter()
                    .map(|f| f.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| fail(lineno, format!("bad size line: {e}")))?;
                if nums.len() != 3 {
                    return Err(fail(lineno, "size line needs rows, cols, entries".into()));
                }
                if nums[0] != nums[1] {
                    return Err(fail(lineno, format!("matrix is {}x{}, not square", nums[0], nums[1])));
                }
                size = Some((nums[0], nums[2]));
                triplets.reserve(nums[2]);
            }
            Some((n, _)) => {
                if fields.len() != 3 {
                    return Err(fail(lineno, "entry needs row, column, value".into()));
                }
                let i: usize = fields[0].parse().map_err(|e| fail(lineno, format!("row: {e}")))?;
                let j: usize = fields[1].parse().map_err(|e| fail(lineno, format!("column: {e}")))?;
                let v: f64 = fields[2].parse().map_err(|e| fail(lineno, format!("value: {e}")))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(fail(lineno, format!("index ({i}, {j}) outside 1..={n}")));
                }
                if !v.is_finite() {
                    return Err(fail(lineno, format!("non-finite value {v}")));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| fail(1, "missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(fail(0, format!("size line promises {nnz} entries, found {}", triplets.len())));
    }
    SparseSymMatrix::from_triangle_triplets(n, &triplets).map_err(|e| match e {
        LinalgError::DuplicateEntry { row, col } => fail(
            0,
            format!("duplicate entry ({}, {})", row + 1, col + 1),
        ),
        e => e.into(),
    })
}

/// Writes the lower triangle with shortest round-trip decimals.
pub fn write_matrix_market(a: &SparseSymMatrix, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_matrix_market_to(a, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| IoError::io(path, e))
}

pub fn write_matrix_market_to<W: Write>(a: &SparseSymMatrix, w: &mut W) -> std::io::Result<()> {
    let lower = a.lower_triplets();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", a.n(), a.n(), lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {}", i + 1, j + 1, format_f64(v))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SparseSymMatrix, IoError> {
        parse_matrix_market(s.as_bytes(), "test")
    }

    #[test]
    fn lower_entries_are_mirrored() {
        let a = parse(
            "%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 3\n1 1 -2\n2 1 0.5\n3 3 1\n",
        )
        .unwrap();
        assert_eq!(a.get(0, 1), Some(0.5));
        assert_eq!(a.get(1, 0), Some(0.5));
        assert_eq!(a.get(0, 0), Some(-2.0));
        assert_eq!(a.get(2, 2), Some(1.0));
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn rejects_unsupported_variants() {
        assert!(parse("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n1 1\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n").is_err());
        assert!(parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n").is_err());
        let dup = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n");
        assert!(matches!(dup, Err(IoError::Format { .. })));
        assert!(parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n").is_err());
    }
}
