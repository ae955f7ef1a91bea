//! CSV ingestion and export.
//!
//! Two layouts are accepted, told apart by the header:
//!
//! ```text
//! z,a,y          one row per subject
//! z,a,y,count    one row per observed cell
//! ```
//!
//! Errors name the 1-based line of the file (the header is line 1).

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{cell, summarize, CountsTable, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    Records,
    Counts,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub format: CsvFormat,
    pub counts: CountsTable,
    /// Present only for the records layout.
    pub records: Option<Vec<TrialRecord>>,
}

fn detect(header: &csv::StringRecord) -> Result<CsvFormat> {
    let cols: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    match cols.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["z", "a", "y"] => Ok(CsvFormat::Records),
        ["z", "a", "y", "count"] => Ok(CsvFormat::Counts),
        _ => Err(Error::Parse {
            row: 1,
            message: format!(
                "header `{}` is neither `z,a,y` nor `z,a,y,count`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        }),
    }
}

fn binary(field: &str, name: &str, row: usize) -> Result<u8> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::Parse {
            row,
            message: format!("column {name} must be 0 or 1, found `{other}`"),
        }),
    }
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| Error::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    let format = detect(header)?;
    let width = match format {
        CsvFormat::Records => 3,
        CsvFormat::Counts => 4,
    };
    let mut records = Vec::new();
    let mut n = [[0u64; 4]; 2];
    let mut seen = [[false; 4]; 2];
    for result in reader.records() {
        let rec = result.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let z = binary(&rec[0], "z", row)?;
        let a = binary(&rec[1], "a", row)?;
        let y = binary(&rec[2], "y", row)?;
        match format {
            CsvFormat::Records => records.push(TrialRecord::new(z, a, y)?),
            CsvFormat::Counts => {
                let c: u64 = rec[3].trim().parse().map_err(|_| Error::Parse {
                    row,
                    message: format!("count must be a nonnegative integer, found `{}`", &rec[3]),
                })?;
                let k = cell(a, y);
                if seen[z as usize][k] {
                    return Err(Error::Parse {
                        row,
                        message: format!("duplicate cell z={z}, a={a}, y={y}"),
                    });
                }
                seen[z as usize][k] = true;
                n[z as usize][k] = c;
            }
        }
    }
    let counts = match format {
        CsvFormat::Records => summarize(&records)?,
        CsvFormat::Counts => {
            let t = CountsTable::new(n);
            if t.total() == 0 {
                return Err(Error::EmptyData);
            }
            t.require_both_arms()?;
            t
        }
    };
    Ok(Dataset {
        format,
        counts,
        records: (format == CsvFormat::Records).then_some(records),
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path)
        .map_err(|e| Error::Io(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(file)
}

/// Counts of either layout.
pub fn load_counts(path: &Path) -> Result<CountsTable> {
    Ok(load_dataset(path)?.counts)
}

pub fn write_counts_csv<W: Write>(counts: &CountsTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["z", "a", "y", "count"]).map_err(io)?;
    for z in 0..2u8 {
        for a in 0..2u8 {
            for y in 0..2u8 {
                w.write_record([
                    z.to_string(),
                    a.to_string(),
                    y.to_string(),
                    counts.get(z, a, y).to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["z", "a", "y"]).map_err(io)?;
    for r in records {
        w.write_record([r.z.to_string(), r.a.to_string(), r.y.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
