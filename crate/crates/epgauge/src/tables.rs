//! Share-table files: CSV with columns `x, share, n_local` (one row per
//! level, `n_local` repeated) or the JSON form of [`ShareTable`].
//! Tables read from files are marked EXTERNAL.

use std::io::{Read, Write};

use epgauge_core::{PercentileLevel, Provenance, ShareRow, ShareTable};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("share table: {0}")]
    Csv(#[from] csv::Error),
    #[error("share table: {0}")]
    Json(#[from] serde_json::Error),
    #[error("share table line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("share table: {0}")]
    Invalid(#[from] epgauge_core::Error),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CsvRow {
    x: String,
    share: f64,
    n_local: u64,
}

pub fn read_share_table_csv<R: Read>(source: R) -> Result<ShareTable, TableError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut rows = Vec::new();
    let mut n_local = None;
    for result in reader.deserialize::<CsvRow>() {
        let row = result?;
        let line = rows.len() as u64 + 2;
        let x: PercentileLevel =
            row.x.parse().map_err(|e: epgauge_core::Error| TableError::Row { line, reason: e.to_string() })?;
        match n_local {
            None => n_local = Some(row.n_local),
            Some(n) if n != row.n_local => {
                return Err(TableError::Row { line, reason: format!("n_local {} differs from {n}", row.n_local) });
            }
            Some(_) => {}
        }
        rows.push(ShareRow { x, share: row.share });
    }
    Ok(ShareTable::new(rows, n_local.unwrap_or(0), Provenance::External)?)
}

/// Reads the JSON form; the provenance is forced to EXTERNAL.
pub fn read_share_table_json<R: Read>(source: R) -> Result<ShareTable, TableError> {
    let table: ShareTable = serde_json::from_reader(source)?;
    Ok(ShareTable::new(table.rows().to_vec(), table.n_local(), Provenance::External)?)
}

pub fn write_share_table_csv<W: Write>(table: &ShareTable, sink: W) -> Result<(), TableError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(["x", "share", "n_local"])?;
    for r in table.rows() {
        w.write_record([r.x.to_string(), r.share.to_string(), table.n_local().to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
