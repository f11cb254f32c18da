use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{format_f64, IoError};
use crate::engine::TraceRecord;

/// `t,e_obj,e_vec,dir_norm,col_norm_1..p,tangent_1..p,energy_1..p,residual_E_1..p`.
pub fn trace_csv_header(p: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "e_obj", "e_vec", "dir_norm"].map(String::from).into();
    for group in ["col_norm", "tangent", "energy", "residual_E"] {
        h.extend((1..=p).map(|i| format!("{group}_{i}")));
    }
    h
}

pub fn write_trace_csv(trace: &[TraceRecord], p: usize, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    write_trace_csv_to(trace, p, file).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Disabled fields are empty cells; numbers use shortest round-trip
/// decimals, so a reread reproduces every value bit for bit.
pub fn write_trace_csv_to<W: Write>(trace: &[TraceRecord], p: usize, w: W) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(w);
    out.write_record(trace_csv_header(p))?;
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for r in trace {
        let mut row = vec![r.t.to_string(), opt(r.e_obj), opt(r.e_vec), format_f64(r.dir_norm)];
        row.extend(r.col_norms.iter().map(|&v| format_f64(v)));
        for group in [&r.tangents, &r.energy, &r.residual_e] {
            match group {
                Some(v) => row.extend(v.iter().map(|&x| format_f64(x))),
                None => row.extend(std::iter::repeat(String::new()).take(p)),
            }
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    parse_trace_csv(file, &path.display().to_string())
}

pub(crate) fn parse_trace_csv<R: Read>(r: R, context: &str) -> Result<Vec<TraceRecord>, IoError> {
    let fail = |line: usize, message: String| IoError::Format {
        context: context.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| fail(1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let p = header.iter().filter(|h| h.starts_with("col_norm_")).count();
    if p == 0 || header != trace_csv_header(p) {
        return Err(fail(1, "header does not match the trace schema".into()));
    }
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| fail(line, e.to_string()))?;
        let cell = |k: usize| -> Result<Option<f64>, IoError> {
            let s = rec.get(k).unwrap_or("");
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| fail(line, format!("column {}: {e}", header[k])))
            }
        };
        let group = |start: usize| -> Result<Option<Vec<f64>>, IoError> {
            let cells: Vec<Option<f64>> = (start..start + p).map(cell).collect::<Result<_, _>>()?;
            if cells.iter().all(Option::is_none) {
                Ok(None)
            } else {
                cells
                    .into_iter()
                    .map(|c| c.ok_or_else(|| fail(line, "partially filled column group".into())))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            }
        };
        let t = rec
            .get(0)
            .unwrap_or("")
            .parse::<usize>()
            .map_err(|e| fail(line, format!("t: {e}")))?;
        out.push(TraceRecord {
            t,
            e_obj: cell(1)?,
            e_vec: cell(2)?,
            dir_norm: cell(3)?.ok_or_else(|| fail(line, "missing dir_norm".into()))?,
            col_norms: group(4)?.ok_or_else(|| fail(line, "missing column norms".into()))?,
            tangents: group(4 + p)?,
            energy: group(4 + 2 * p)?,
            residual_e: group(4 + 3 * p)?,
        });
    }
    Ok(out)
}
