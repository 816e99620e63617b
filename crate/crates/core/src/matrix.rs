//! Data carriers shared by every stage of the analysis.

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// `n × d` matrix of finite observations with one label per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Array2<f64>,
    names: Vec<String>,
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("Y{j}")).collect()
}

impl SampleMatrix {
    /// Build a matrix, rejecting non-finite entries and mismatched labels.
    pub fn new(values: Array2<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(format!("non-finite value {v} at row {i}, column {j}")));
        }
        Ok(Self { values, names })
    }

    /// Matrix with default labels `Y1..Yd`.
    pub fn from_array(values: Array2<f64>) -> Result<Self> {
        let names = default_names(values.ncols());
        Self::new(values, names)
    }

    /// Build from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::from_array(values)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<String>) {
        (self.values, self.names)
    }

    /// Keep only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(0), rows),
            names: self.names.clone(),
        }
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(1), cols),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
        }
    }
}

/// Extreme events on the standard Pareto scale: unit scale, zero shape,
/// support `{x : max_j x_j > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardParetoMatrix {
    values: Array2<f64>,
    event_indices: Vec<usize>,
    names: Vec<String>,
    warnings: Vec<String>,
}

impl StandardParetoMatrix {
    /// Validate that every row lies in the L-shaped support.
    pub fn new(values: Array2<f64>, event_indices: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if event_indices.len() != values.nrows() {
            return Err(Error::Shape(format!(
                "{} event indices for {} rows",
                event_indices.len(),
                values.nrows()
            )));
        }
        if names.len() != values.ncols() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                names.len(),
                values.ncols()
            )));
        }
        for (i, row) in values.outer_iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("non-finite value in event row {i}")));
            }
            if !row.iter().any(|&v| v > 0.0) {
                return Err(Error::param(format!(
                    "event row {i} has no positive component"
                )));
            }
        }
        Ok(Self {
            values,
            event_indices,
            names,
            warnings: Vec::new(),
        })
    }

    /// Matrix with default labels and event indices `0..m`.
    pub fn from_array(values: Array2<f64>) -> Result<Self> {
        let names = default_names(values.ncols());
        let idx = (0..values.nrows()).collect();
        Self::new(values, idx, names)
    }

    pub(crate) fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    /// Row indices of the events in the source sample.
    pub fn event_indices(&self) -> &[usize] {
        &self.event_indices
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Non-fatal diagnostics attached during the transform (ties, clamped rows).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Keep only the listed columns. Rows that lose every positive component
    /// are dropped, since they leave the support.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let sub = self.values.select(Axis(1), cols);
        let keep: Vec<usize> = sub
            .outer_iter()
            .enumerate()
            .filter(|(_, r)| r.iter().any(|&v| v > 0.0))
            .map(|(i, _)| i)
            .collect();
        let values = sub.select(Axis(0), &keep);
        let events = keep.iter().map(|&i| self.event_indices[i]).collect();
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        Ok(Self::new(values, events, names)?.with_warnings(self.warnings.clone()))
    }
}
