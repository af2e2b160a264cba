//! CSV files of benchmark records. Every file has a header row with a
//! fixed column order, written even when there are no records.

use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;
use starid_core::identify::Outcome;

use crate::bench::{
    PivotRecord, QueryRecord, TrialRecord, TuneRecord, PIVOT_COLUMNS, QUERY_COLUMNS, TRIAL_COLUMNS, TUNE_COLUMNS,
};
use crate::Error;

pub trait CsvRecord: Sized {
    const COLUMNS: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    fn parse(row: &StringRecord) -> Option<Self>;
}

fn field<T: FromStr>(row: &StringRecord, i: usize) -> Option<T> {
    row.get(i)?.parse().ok()
}

fn flag(b: bool) -> String {
    (b as u8).to_string()
}

fn parse_flag(row: &StringRecord, i: usize) -> Option<bool> {
    match row.get(i)? {
        "1" => Some(true),
        "0" => Some(false),
        _ => None,
    }
}

impl CsvRecord for TrialRecord {
    const COLUMNS: &'static [&'static str] = &TRIAL_COLUMNS;

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.rho.to_string(),
            self.omega.to_string(),
            self.seed.to_string(),
            self.outcome.tag().to_string(),
            flag(self.h_correct),
            flag(self.r_correct),
            self.acc_query.to_string(),
            self.acc_total.to_string(),
            self.ms.to_string(),
        ]
    }

    fn parse(row: &StringRecord) -> Option<Self> {
        Some(TrialRecord {
            method: row.get(0)?.to_string(),
            rho: field(row, 1)?,
            omega: field(row, 2)?,
            seed: field(row, 3)?,
            outcome: Outcome::from_str(row.get(4)?).ok()?,
            h_correct: parse_flag(row, 5)?,
            r_correct: parse_flag(row, 6)?,
            acc_query: field(row, 7)?,
            acc_total: field(row, 8)?,
            ms: field(row, 9)?,
        })
    }
}

impl CsvRecord for QueryRecord {
    const COLUMNS: &'static [&'static str] = &QUERY_COLUMNS;

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.seed.to_string(),
            self.candidates.to_string(),
            flag(self.truth_in_r),
            self.accesses.to_string(),
            self.ms.to_string(),
        ]
    }

    fn parse(row: &StringRecord) -> Option<Self> {
        Some(QueryRecord {
            method: row.get(0)?.to_string(),
            seed: field(row, 1)?,
            candidates: field(row, 2)?,
            truth_in_r: parse_flag(row, 3)?,
            accesses: field(row, 4)?,
            ms: field(row, 5)?,
        })
    }
}

impl CsvRecord for PivotRecord {
    const COLUMNS: &'static [&'static str] = &PIVOT_COLUMNS;

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.seed.to_string(),
            flag(self.first_unique),
            self.outcome.tag().to_string(),
            self.acc_to_r.map(|a| a.to_string()).unwrap_or_default(),
            self.acc_query.to_string(),
            self.acc_total.to_string(),
            self.ms.to_string(),
        ]
    }

    fn parse(row: &StringRecord) -> Option<Self> {
        Some(PivotRecord {
            method: row.get(0)?.to_string(),
            seed: field(row, 1)?,
            first_unique: parse_flag(row, 2)?,
            outcome: Outcome::from_str(row.get(3)?).ok()?,
            acc_to_r: match row.get(4)? {
                "" => None,
                s => Some(s.parse().ok()?),
            },
            acc_query: field(row, 5)?,
            acc_total: field(row, 6)?,
            ms: field(row, 7)?,
        })
    }
}

impl CsvRecord for TuneRecord {
    const COLUMNS: &'static [&'static str] = &TUNE_COLUMNS;

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.sigma1.to_string(),
            self.sigma2.map(|s| s.to_string()).unwrap_or_default(),
            self.unique.to_string(),
        ]
    }

    fn parse(row: &StringRecord) -> Option<Self> {
        let sigma2 = match row.get(2)? {
            "" => None,
            s => Some(s.parse().ok()?),
        };
        Some(TuneRecord { method: row.get(0)?.to_string(), sigma1: field(row, 1)?, sigma2, unique: field(row, 3)? })
    }
}

pub fn write_records<R: CsvRecord>(path: &Path, records: &[R]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(R::COLUMNS)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records<R: CsvRecord>(path: &Path) -> Result<Vec<R>, Error> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != R::COLUMNS {
        return Err(Error::parse(path, 1, format!("expected columns {}", R::COLUMNS.join(","))));
    }
    let mut out = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let row = row?;
        out.push(R::parse(&row).ok_or_else(|| Error::parse(path, n + 2, "malformed record"))?);
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, 0, format!("{other:?}")),
    }
}
