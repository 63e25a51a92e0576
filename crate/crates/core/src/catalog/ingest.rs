//! Delimited-text ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Cell = Option<String>;

/// Rows of a tabular file, with nulls already resolved.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Relation {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Relation {
    pub fn cardinality(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Keeps only `names`, in that order. Fails on the first missing one.
    pub fn project(&self, names: &[String]) -> std::result::Result<Relation, String> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n).ok_or_else(|| n.clone()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Relation {
            columns: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
                .collect(),
        })
    }
}

/// Tokens that ingest as null. Always contains the empty string.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTokens(Vec<String>);

impl Default for NullTokens {
    fn default() -> Self {
        NullTokens(vec![String::new()])
    }
}

impl NullTokens {
    pub fn with_extra<I: IntoIterator<Item = String>>(extra: I) -> Self {
        let mut t = Self::default();
        for e in extra {
            if !t.0.contains(&e) {
                t.0.push(e);
            }
        }
        t
    }

    pub fn is_null(&self, cell: &str) -> bool {
        self.0.iter().any(|t| t == cell)
    }
}

/// Reads a comma-separated file whose first row is the header.
pub fn read_delimited(path: &Path, nulls: &NullTokens) -> Result<Relation> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_delimited_from(file, &path.display().to_string(), nulls)
}

pub fn read_delimited_from<R: std::io::Read>(reader: R, label: &str, nulls: &NullTokens) -> Result<Relation> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(label, e))?;
    let columns: Vec<String> = header.iter().map(|h| h.trim_start_matches('\u{feff}').to_string()).collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(label, e))?;
        rows.push(
            record
                .iter()
                .map(|c| if nulls.is_null(c) { None } else { Some(c.to_string()) })
                .collect(),
        );
    }
    Ok(Relation { columns, rows })
}

fn csv_error(label: &str, e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::RowFormatError {
        file: label.to_string(),
        row,
        detail: match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("expected {expected_len} fields, found {len}")
            }
            _ => e.to_string(),
        },
    }
}
