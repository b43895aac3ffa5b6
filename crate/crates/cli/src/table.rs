//! Plot-ready CSV tables. Floats are written with 17 significant digits so
//! that parsing a file back reproduces every value exactly.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

pub trait Row {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv_bytes<R: Row>(rows: &[R]) -> std::result::Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(R::header())?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_csv<R: Row>(rows: &[R], path: Option<&Path>) -> Result<()> {
    let display = path.map_or_else(|| "<stdout>".into(), |p| p.to_path_buf());
    let bytes = to_csv_bytes(rows).map_err(|source| CliError::Csv {
        path: display.clone(),
        source,
    })?;
    emit(&bytes, path)
}

pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Header and numeric body of a CSV produced by [`write_csv`].
pub fn read_numeric_csv(text: &str) -> std::result::Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec
            .iter()
            .map(|f| match f {
                "true" => Ok(1.0),
                "false" => Ok(0.0),
                _ => f.parse::<f64>().map_err(|e| format!("{f}: {e}")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
