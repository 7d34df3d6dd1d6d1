//! CSV row layouts of the files written and read by the commands.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastRow {
    pub series_id: String,
    pub scheme: String,
    pub step: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelForecastRow {
    pub series_id: String,
    pub model: String,
    pub step: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRow {
    pub series_id: String,
    pub scheme: String,
    pub model: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub scheme: String,
    pub frequency: String,
    pub criterion: String,
    pub mase: f64,
    pub msis: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignificanceRow {
    pub scheme_a: String,
    pub scheme_b: String,
    pub meanrank_a: f64,
    pub meanrank_b: f64,
    pub cd: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThirdsRow {
    pub scheme: String,
    pub top: f64,
    pub middle: f64,
    pub bottom: f64,
}

/// Writes `rows` with a header line. An empty slice still gets the header.
pub fn write_rows<T: Serialize>(path: &Path, headers: &[&str], rows: &[T]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::User(format!("cannot create {}: {e}", path.display())))?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    wtr.write_record(headers)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).map_err(|e| CliError::User(format!("cannot open {}: {e}", path.display())))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CliError::User(format!("{} row {}: {e}", path.display(), i + 2))))
        .collect()
}
