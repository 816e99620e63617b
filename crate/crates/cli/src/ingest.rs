//! CSV input: header row, comma separator, `.` decimal point, UTF-8.

use std::collections::BTreeMap;
use std::path::Path;

use extremal_causality::SampleMatrix;
use ndarray::Array2;

use crate::error::{CliError, CliResult};

/// Which header columns carry labels rather than measurements.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestOptions {
    pub group_col: Option<String>,
    pub time_col: Option<String>,
    /// Restrict the analysis to these columns, in this order.
    pub columns: Option<Vec<String>>,
}

/// Parsed file: numeric columns plus optional group and time labels per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub groups: Option<Vec<String>>,
    pub times: Option<Vec<String>>,
}

fn to_matrix(names: &[String], rows: &[Vec<f64>]) -> CliResult<SampleMatrix> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let values = Array2::from_shape_vec((rows.len(), names.len()), flat)
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(SampleMatrix::new(values, names.to_vec())?)
}

impl Dataset {
    /// All rows as one matrix, in file order.
    pub fn matrix(&self) -> CliResult<SampleMatrix> {
        to_matrix(&self.names, &self.rows)
    }

    /// One matrix per group label, sorted by label. Without a group column the
    /// whole file forms a single group named `all`.
    pub fn by_group(&self) -> CliResult<BTreeMap<String, SampleMatrix>> {
        let Some(groups) = &self.groups else {
            return Ok(BTreeMap::from([("all".to_string(), self.matrix()?)]));
        };
        let mut split: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
        for (g, row) in groups.iter().zip(&self.rows) {
            split.entry(g.clone()).or_default().push(row.clone());
        }
        split
            .into_iter()
            .map(|(g, rows)| Ok((g, to_matrix(&self.names, &rows)?)))
            .collect()
    }
}

fn locate(header: &[String], name: &str, role: &str) -> CliResult<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Usage(format!("{role} column '{name}' not found in header {header:?}")))
}

/// Read a CSV file. Data rows are numbered from 1, columns from 1 in header
/// order, in error messages.
pub fn ingest_csv(path: &Path, opts: &IngestOptions) -> CliResult<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: bad header: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let group_idx = opts.group_col.as_deref().map(|g| locate(&header, g, "group")).transpose()?;
    let time_idx = opts.time_col.as_deref().map(|t| locate(&header, t, "time")).transpose()?;
    let value_idx: Vec<usize> = match &opts.columns {
        Some(cols) => cols.iter().map(|c| locate(&header, c, "value")).collect::<CliResult<_>>()?,
        None => (0..header.len())
            .filter(|&k| Some(k) != group_idx && Some(k) != time_idx)
            .collect(),
    };
    if value_idx.is_empty() {
        return Err(CliError::Data(format!("{}: no numeric columns", path.display())));
    }

    let mut rows = Vec::new();
    let mut groups = group_idx.map(|_| Vec::new());
    let mut times = time_idx.map(|_| Vec::new());
    for (r, record) in reader.records().enumerate() {
        let row_no = r + 1;
        let record = record.map_err(|e| CliError::Data(format!("{}: row {row_no}: {e}", path.display())))?;
        let mut row = Vec::with_capacity(value_idx.len());
        for &k in &value_idx {
            let cell = record.get(k).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: row {row_no}, column {} ('{}'): cannot parse '{cell}' as a number",
                    path.display(),
                    k + 1,
                    header[k]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: row {row_no}, column {} ('{}'): non-finite value '{cell}'",
                    path.display(),
                    k + 1,
                    header[k]
                )));
            }
            row.push(v);
        }
        rows.push(row);
        if let (Some(g), Some(k)) = (groups.as_mut(), group_idx) {
            g.push(record.get(k).unwrap_or("").trim().to_string());
        }
        if let (Some(t), Some(k)) = (times.as_mut(), time_idx) {
            t.push(record.get(k).unwrap_or("").trim().to_string());
        }
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(Dataset {
        names: value_idx.iter().map(|&k| header[k].clone()).collect(),
        rows,
        groups,
        times,
    })
}

/// Write a matrix with a header row. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_csv(path: &Path, data: &SampleMatrix) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    let fail = |e: csv::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    w.write_record(data.names()).map_err(fail)?;
    for row in data.values().outer_iter() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}
