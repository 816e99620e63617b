//! Moving-window aggregation of consecutive rows.

use std::str::FromStr;

use extremal_causality::{Error, SampleMatrix};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    /// Total over the window.
    Sum,
    /// Average over the window.
    Mean,
    /// Value at the middle row.
    #[default]
    Center,
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sum" => Ok(Self::Sum),
            "mean" => Ok(Self::Mean),
            "center" | "centre" => Ok(Self::Center),
            other => Err(format!("unknown aggregator '{other}' (expected sum, mean or center)")),
        }
    }
}

/// Window of `length` rows moved by `stride` rows, one aggregator per column.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowConfig {
    pub length: usize,
    pub aggregators: Vec<Aggregator>,
    pub stride: usize,
}

impl WindowConfig {
    pub fn uniform(length: usize, aggregator: Aggregator, columns: usize) -> Self {
        Self {
            length,
            aggregators: vec![aggregator; columns],
            stride: 1,
        }
    }
}

/// Output row `t` aggregates input rows `t·stride .. t·stride + length`.
/// With the default stride of 1 there are `n − length + 1` output rows.
pub fn apply_windows(data: &SampleMatrix, cfg: &WindowConfig) -> Result<SampleMatrix, Error> {
    let (n, d) = (data.nrows(), data.ncols());
    if cfg.length == 0 || cfg.length.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window length must be odd and at least 1, got {}",
            cfg.length
        )));
    }
    if cfg.stride == 0 {
        return Err(Error::InvalidParameter("window stride must be at least 1".into()));
    }
    if cfg.aggregators.len() != d {
        return Err(Error::Shape(format!(
            "{} aggregators for {d} columns",
            cfg.aggregators.len()
        )));
    }
    if n < cfg.length {
        return Err(Error::InsufficientData {
            what: "rows for the moving window",
            needed: cfg.length,
            got: n,
        });
    }
    let starts: Vec<usize> = (0..=n - cfg.length).step_by(cfg.stride).collect();
    let y = data.values();
    let mid = cfg.length / 2;
    let out = Array2::from_shape_fn((starts.len(), d), |(t, j)| {
        let s = starts[t];
        let block = (s..s + cfg.length).map(|i| y[[i, j]]);
        match cfg.aggregators[j] {
            Aggregator::Sum => block.sum(),
            Aggregator::Mean => block.sum::<f64>() / cfg.length as f64,
            Aggregator::Center => y[[s + mid, j]],
        }
    });
    SampleMatrix::new(out, data.names().to_vec())
}
