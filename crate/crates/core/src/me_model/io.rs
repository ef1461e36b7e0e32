//! Dataset CSV ingestion and emission.
//!
//! Format: UTF-8, comma separator, decimal point, one header row; first
//! column is the X measurement, remaining columns Y₁..Y_r.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::Dataset;

/// Read a dataset from CSV. Malformed rows are reported with their
/// 1-based line number (the header is line 1).
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let width = reader.headers()?.len();
    if width < 2 {
        return Err(Error::MalformedData {
            row: 1,
            reason: format!("need at least 2 columns (X, Y1..), found {width}"),
        });
    }
    let mut rows: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| Error::MalformedData {
            row: line,
            reason: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::MalformedData {
                row: line,
                reason: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for field in record.iter() {
            let value: f64 = field.parse().map_err(|_| Error::MalformedData {
                row: line,
                reason: format!("cannot parse `{field}` as a number"),
            })?;
            rows.push(value);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::MalformedData {
            row: 1,
            reason: "no data rows".into(),
        });
    }
    Dataset::new(DMatrix::from_row_slice(n, width, &rows)).map_err(|e| match e {
        Error::MalformedData { row, reason } => Error::MalformedData { row: row + 1, reason },
        other => other,
    })
}

/// Write a dataset with the standard header `x,y1..yr`.
pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let r = data.n_responses();
    let mut header = vec!["x".to_string()];
    for k in 1..=r {
        header.push(format!("y{k}"));
    }
    writer.write_record(&header)?;
    for i in 0..data.n() {
        let record: Vec<String> = (0..data.dim())
            .map(|j| format!("{}", data.matrix()[(i, j)]))
            .collect();
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a latent-variable sidecar (component labels are 1-based in files).
pub fn write_latents_csv(
    path: &Path,
    x: &[f64],
    s: &[usize],
    u: &[f64],
    t: Option<&[f64]>,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    match t {
        Some(_) => writer.write_record(["x", "s", "u", "t"])?,
        None => writer.write_record(["x", "s", "u"])?,
    }
    for i in 0..x.len() {
        let mut record = vec![
            format!("{}", x[i]),
            format!("{}", s[i] + 1),
            format!("{}", u[i]),
        ];
        if let Some(t) = t {
            record.push(format!("{}", t[i]));
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
