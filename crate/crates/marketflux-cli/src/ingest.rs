//! Reading of comma-separated series files: a header row, then columns
//! t, value and an optional volume; further columns are ignored.

use std::io::Read;
use std::path::Path;

use marketflux::estimators::aggregate;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesData {
    pub t: Vec<f64>,
    /// Increments per row.
    pub value: Vec<f64>,
    pub volume: Option<Vec<f64>>,
}

impl SeriesData {
    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    /// Sums of `factor` consecutive increments; t is the start of each block and a
    /// trailing partial block is dropped.
    pub fn aggregate(&self, factor: usize) -> CliResult<SeriesData> {
        if factor == 0 {
            return Err(CliError::input("aggregation factor must be at least 1"));
        }
        Ok(SeriesData {
            t: self.t.chunks_exact(factor).map(|c| c[0]).collect(),
            value: aggregate(&self.value, factor),
            volume: self.volume.as_ref().map(|v| aggregate(v, factor)),
        })
    }
}

pub fn ingest(path: &Path) -> CliResult<SeriesData> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input { message: format!("cannot open series: {e}"), path: Some(path.into()), line: None })?;
    ingest_reader(file, path)
}

/// Parses a series; every rejection carries the 1-based line number of the file.
pub fn ingest_reader<R: Read>(reader: R, path: &Path) -> CliResult<SeriesData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, path))?.clone();
    if headers.len() < 2 {
        return Err(CliError::at_line(path, 1, "header needs at least the columns t and value"));
    }
    let with_volume = headers.len() >= 3;
    let mut out = SeriesData { t: Vec::new(), value: Vec::new(), volume: with_volume.then(Vec::new) };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(e, path))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != headers.len() {
            return Err(CliError::at_line(path, line, format!("expected {} fields, found {}", headers.len(), rec.len())));
        }
        let field = |i: usize| -> CliResult<f64> {
            let s = rec[i].trim();
            let v: f64 = s
                .parse()
                .map_err(|_| CliError::at_line(path, line, format!("column {} is not a number: {s:?}", headers[i].trim())))?;
            if !v.is_finite() {
                return Err(CliError::at_line(path, line, format!("column {} is not finite: {s:?}", headers[i].trim())));
            }
            Ok(v)
        };
        let t = field(0)?;
        if let Some(&prev) = out.t.last() {
            if t < prev {
                return Err(CliError::at_line(path, line, format!("t decreases from {prev} to {t}")));
            }
        }
        out.t.push(t);
        out.value.push(field(1)?);
        if let Some(v) = out.volume.as_mut() {
            v.push(field(2)?);
        }
    }
    Ok(out)
}

fn csv_error(e: csv::Error, path: &Path) -> CliError {
    let line = e.position().map(|p| p.line());
    CliError::Input { message: format!("malformed CSV: {e}"), path: Some(path.into()), line }
}
