//! CSV record format.
//!
//! One header row (exact, see [`HEADER`]), one row per record, and a final
//! completeness marker `#end,<schema>,<row count>`. Readers reject files
//! without the marker, so a truncated run is never mistaken for a full one.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "restrack-records-v1";

pub const HEADER: [&str; 15] = [
    "trial",
    "round",
    "planner",
    "attacker",
    "m",
    "alpha",
    "objective",
    "f_full",
    "f_attacked",
    "attack_rate",
    "f_true_full",
    "f_true_attacked",
    "oracle_calls",
    "wall_time_micros",
    "seed",
];

const MARKER: &str = "#end";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub trial: u64,
    pub round: u64,
    pub planner: String,
    pub attacker: String,
    pub m: u64,
    pub alpha: u64,
    /// `coverage` (true positions) or `expected-detections` (beliefs).
    pub objective: String,
    pub f_full: f64,
    pub f_attacked: f64,
    /// Empty when `f_full = 0`.
    pub attack_rate: Option<f64>,
    /// Ground-truth coverage count of the full and attacked plans.
    pub f_true_full: f64,
    pub f_true_attacked: f64,
    pub oracle_calls: u64,
    /// Informational; zero unless wall-time recording is enabled.
    pub wall_time_micros: u64,
    pub seed: u64,
}

pub fn write_rows<W: Write>(out: W, rows: &[RecordRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(HEADER).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let count = rows.len().to_string();
    w.write_record([MARKER, SCHEMA_VERSION, count.as_str()])
        .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_csv_file(path: &Path, rows: &[RecordRow]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let file = std::fs::File::create(&tmp)?;
        write_rows(std::io::BufWriter::new(file), rows)?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<RecordRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();
    let parse = |line: u64, reason: String| Error::Parse { line, reason };

    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(parse(line_of(&e), e.to_string())),
        None => return Err(parse(1, "empty input: missing header row".into())),
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(parse(1, format!("header must be `{}`", HEADER.join(","))));
    }

    let mut rows = Vec::new();
    let mut complete = false;
    for rec in records {
        let rec = rec.map_err(|e| parse(line_of(&e), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if complete {
            return Err(parse(line, "data after completeness marker".into()));
        }
        if rec.get(0) == Some(MARKER) {
            if rec.get(1) != Some(SCHEMA_VERSION) {
                return Err(parse(
                    line,
                    format!("unsupported schema `{}`", rec.get(1).unwrap_or("")),
                ));
            }
            let declared: usize = rec
                .get(2)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| parse(line, "marker row needs a row count".into()))?;
            if declared != rows.len() {
                return Err(parse(
                    line,
                    format!("marker declares {declared} rows, found {}", rows.len()),
                ));
            }
            complete = true;
            continue;
        }
        if rec.len() != HEADER.len() {
            return Err(parse(
                line,
                format!("expected {} fields, found {}", HEADER.len(), rec.len()),
            ));
        }
        let row: RecordRow = rec
            .deserialize(None)
            .map_err(|e| parse(line, e.to_string()))?;
        rows.push(row);
    }
    if !complete {
        return Err(parse(
            rows.len() as u64 + 2,
            "missing completeness marker; the file is truncated".into(),
        ));
    }
    Ok(rows)
}

fn line_of(e: &csv::Error) -> u64 {
    e.position().map_or(0, |p| p.line())
}

pub fn read_csv_file(path: &Path) -> Result<Vec<RecordRow>> {
    read_rows(std::fs::File::open(path)?)
}
