//! Result files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::sweep::TrialRecord;

pub const CSV_HEADER: &str = "trial,scheme,parameter,value,c_total,c_system,c_learn,t_one,e_one,iterations,wall_time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// JSON for `.json` paths, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> csv::Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Writes `records` to `path`.
pub fn emit(records: &[TrialRecord], format: Format, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(HarnessError::InvalidConfig("no records to write".into()));
    }
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(records, &mut out).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::io(path, io),
            other => HarnessError::format(path, format!("{other:?}")),
        })?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records).map_err(|e| HarnessError::format(path, e))?;
            out.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
        }
    }
    out.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    match Format::from_path(path) {
        Format::Csv => read_csv(file).map_err(|e| HarnessError::format(path, e)),
        Format::Json => serde_json::from_reader(file).map_err(|e| HarnessError::format(path, e)),
    }
}
