use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::records::{Acuity, Feature, RawRecord, TriageRecord};
use crate::{Error, Result};

/// Why a row was excluded at load time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// 1-based data row (the header is row 0).
    pub row: usize,
    pub column: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOutcome {
    pub records: Vec<RawRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Columns {
    vitals: [usize; 6],
    acuity: usize,
    pain: Option<usize>,
    complaint: Option<usize>,
}

impl Columns {
    fn locate(header: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h.trim().trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
        };
        let acuity = find("acuity").ok_or(Error::MissingColumn("acuity"))?;
        let mut vitals = [0; 6];
        for f in Feature::ALL {
            vitals[f as usize] = find(f.column()).ok_or(Error::MissingColumn(f.column()))?;
        }
        Ok(Columns {
            vitals,
            acuity,
            pain: find("pain"),
            complaint: find("chiefcomplaint"),
        })
    }
}

/// Loads a comma-separated triage table.
pub fn load_records(path: impl AsRef<Path>) -> Result<LoadOutcome> {
    load_records_delimited(path, b',')
}

pub fn load_records_delimited(path: impl AsRef<Path>, delimiter: u8) -> Result<LoadOutcome> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file, delimiter)
}

pub fn read_records<R: Read>(reader: R, delimiter: u8) -> Result<LoadOutcome> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(reader);
    let columns = Columns::locate(rdr.headers()?)?;
    let width = rdr.headers()?.len();

    let mut out = LoadOutcome::default();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                out.diagnostics.push(Diagnostic {
                    row: row_no,
                    column: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if row.len() != width {
            out.diagnostics.push(Diagnostic {
                row: row_no,
                column: None,
                message: format!("expected {width} fields, found {}", row.len()),
            });
            continue;
        }
        match parse_row(&row, &columns) {
            Ok(rec) => out.records.push(rec),
            Err((column, message)) => out.diagnostics.push(Diagnostic {
                row: row_no,
                column: Some(column),
                message,
            }),
        }
    }
    Ok(out)
}

fn cell(row: &csv::StringRecord, idx: usize) -> Option<&str> {
    row.get(idx).map(str::trim).filter(|s| !s.is_empty())
}

fn parse_row(row: &csv::StringRecord, cols: &Columns) -> Result<RawRecord, (String, String)> {
    let mut rec = RawRecord::default();
    for f in Feature::ALL {
        if let Some(text) = cell(row, cols.vitals[f as usize]) {
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => rec.vitals[f as usize] = Some(v),
                _ => {
                    return Err((f.column().to_string(), format!("non-numeric value `{text}`")));
                }
            }
        }
    }
    if let Some(text) = cell(row, cols.acuity) {
        let level = text
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && (1.0..=5.0).contains(v))
            .and_then(|v| Acuity::from_level(v as u8));
        match level {
            Some(a) => rec.acuity = Some(a),
            None => return Err(("acuity".into(), format!("invalid acuity `{text}`"))),
        }
    }
    // Pain is free text in the source table ("unable", "10+"); keep integers only.
    rec.pain = cols
        .pain
        .and_then(|i| cell(row, i))
        .and_then(|t| t.parse::<f64>().ok())
        .filter(|v| v.fract() == 0.0 && (0.0..=10.0).contains(v))
        .map(|v| v as u8);
    rec.chief_complaint = cols.complaint.and_then(|i| cell(row, i)).map(str::to_owned);
    Ok(rec)
}

const HEADER: [&str; 9] = [
    "temperature",
    "heartrate",
    "resprate",
    "o2sat",
    "sbp",
    "dbp",
    "pain",
    "acuity",
    "chiefcomplaint",
];

pub fn write_records(path: impl AsRef<Path>, records: &[TriageRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_to(file, records)
}

pub fn write_records_to<W: Write>(writer: W, records: &[TriageRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        let mut fields: Vec<String> = Feature::ALL
            .iter()
            .map(|&f| r.vitals.get(f).to_string())
            .collect();
        fields.push(r.vitals.pain.map(|p| p.to_string()).unwrap_or_default());
        fields.push(r.acuity.to_string());
        fields.push(r.chief_complaint.clone().unwrap_or_default());
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
