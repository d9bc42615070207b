//! CSV loading and preprocessing of real regression tables.

use std::path::Path;

use crate::error::{PlsError, Result};
use crate::model::Dataset;
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Parsed numeric table with a designated response column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub response_column: String,
    /// Records skipped for a wrong field count or an unparseable cell.
    pub dropped: usize,
}

impl RawTable {
    pub fn response_index(&self) -> usize {
        self.header
            .iter()
            .position(|h| *h == self.response_column)
            .expect("validated at load")
    }

    pub fn feature_names(&self) -> Vec<&str> {
        let r = self.response_index();
        self.header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != r)
            .map(|(_, h)| h.as_str())
            .collect()
    }
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    if !path.exists() {
        return Err(PlsError::MissingFile(path.to_path_buf()));
    }
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| PlsError::Parse(format!("{}: {e}", path.display())))
}

fn read_numeric(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>, usize)> {
    let mut rdr = open(path)?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| PlsError::Parse(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    let mut dropped = 0;
    for rec in rdr.records() {
        let Ok(rec) = rec else {
            dropped += 1;
            continue;
        };
        if rec.len() != header.len() {
            dropped += 1;
            continue;
        }
        let parsed: Option<Vec<f64>> = rec
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        match parsed {
            Some(r) => rows.push(r),
            None => dropped += 1,
        }
    }
    if header.is_empty() || rows.is_empty() {
        return Err(PlsError::EmptyTable);
    }
    Ok((header, rows, dropped))
}

pub fn load_csv(path: &Path, response_column: &str) -> Result<RawTable> {
    let (header, rows, dropped) = read_numeric(path)?;
    if !header.iter().any(|h| h == response_column) {
        return Err(PlsError::MissingColumn(response_column.to_owned()));
    }
    if header.len() < 2 {
        return Err(PlsError::EmptyTable);
    }
    Ok(RawTable {
        header,
        rows,
        response_column: response_column.to_owned(),
        dropped,
    })
}

/// Joins a feature file and a single-column response file row by row. Rows
/// dropped in either file are not realigned, so both must parse cleanly.
pub fn load_pair(x_path: &Path, y_path: &Path) -> Result<RawTable> {
    let (mut header, mut rows, dx) = read_numeric(x_path)?;
    let (yh, yrows, dy) = read_numeric(y_path)?;
    if yh.len() != 1 {
        return Err(PlsError::DimensionMismatch(format!(
            "{} should hold one column, found {}",
            y_path.display(),
            yh.len()
        )));
    }
    if dx + dy > 0 || rows.len() != yrows.len() {
        return Err(PlsError::DimensionMismatch(format!(
            "{} rows of X vs {} of y ({} malformed)",
            rows.len(),
            yrows.len(),
            dx + dy
        )));
    }
    let name = if header.contains(&yh[0]) { format!("{}_response", yh[0]) } else { yh[0].clone() };
    header.push(name.clone());
    for (r, y) in rows.iter_mut().zip(yrows) {
        r.push(y[0]);
    }
    Ok(RawTable {
        header,
        rows,
        response_column: name,
        dropped: 0,
    })
}

/// Drops rows whose response is at or above `drop_response_at_or_above`,
/// centers every column and scales features to unit sample variance.
pub fn preprocess<T: Scalar>(t: &RawTable, drop_response_at_or_above: Option<f64>) -> Result<Dataset<T>> {
    preprocess_with(t, drop_response_at_or_above, true)
}

/// As [`preprocess`], with feature scaling optional.
pub fn preprocess_with<T: Scalar>(
    t: &RawTable,
    drop_response_at_or_above: Option<f64>,
    scale: bool,
) -> Result<Dataset<T>> {
    let r = t.response_index();
    let kept: Vec<&Vec<f64>> = t
        .rows
        .iter()
        .filter(|row| drop_response_at_or_above.is_none_or(|th| row[r] < th))
        .collect();
    let dim = t.header.len() - 1;
    if kept.is_empty() {
        return Err(PlsError::EmptyTable);
    }
    if kept.len() < dim + 2 {
        return Err(PlsError::InvalidArgument(format!(
            "{} rows left for {dim} features; need at least {}",
            kept.len(),
            dim + 2
        )));
    }
    let features: Vec<usize> = (0..t.header.len()).filter(|&j| j != r).collect();
    let x = Matrix::from_fn(kept.len(), dim, |i, j| T::lit(kept[i][features[j]]));
    let y: Vec<T> = kept.iter().map(|row| T::lit(row[r])).collect();
    let mut d = Dataset::new(x, y)?;
    d.center_in_place();
    if !scale {
        return Ok(d);
    }
    let nm1 = T::from_usize(d.n() - 1).expect("rows");
    let mut scales = Vec::with_capacity(dim);
    for (j, &src) in features.iter().enumerate() {
        let col = d.x.column(j);
        let sd = (col.iter().map(|&v| v * v).sum::<T>() / nm1).sqrt();
        if !(sd > T::zero()) {
            return Err(PlsError::DegenerateColumn(t.header[src].clone()));
        }
        let scaled: Vec<T> = col.iter().map(|&v| v / sd).collect();
        d.x.set_column(j, &scaled);
        scales.push(sd);
    }
    d.column_scales = Some(scales);
    Ok(d)
}
