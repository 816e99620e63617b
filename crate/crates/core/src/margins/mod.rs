//! Extreme-event selection and marginal standardization.
//!
//! An observation is an extreme event when at least one component exceeds
//! its threshold. Events are shifted by the thresholds and every margin is
//! mapped to the standard Pareto scale, on which the positive part of each
//! margin is unit exponential. Two maps are offered: an empirical rank
//! transform (default) and a parametric one through fitted generalized
//! Pareto margins.

mod gp;

use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use gp::{fit_gp_margin, pwm_estimate, GpMarginFit, MIN_RELIABLE_EXCEEDANCES, XI_BOUNDS};

use crate::error::{Error, Result};
use crate::matrix::{SampleMatrix, StandardParetoMatrix};
use crate::stats;

/// Floor applied to `1 + ξ z / σ` for sub-support values in the parametric map.
pub const GP_SUPPORT_FLOOR: f64 = 1e-6;

/// Share of identical values in a margin above which the rank transform
/// attaches a tie warning.
pub const TIE_WARNING_SHARE: f64 = 0.5;

/// Marginal thresholds: empirical quantiles at `quantile_level`, or
/// explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub quantile_level: f64,
    pub thresholds: Option<Vec<f64>>,
}

impl ThresholdSpec {
    pub fn quantile(q: f64) -> Self {
        Self {
            quantile_level: q,
            thresholds: None,
        }
    }

    pub fn explicit(thresholds: Vec<f64>) -> Self {
        Self {
            quantile_level: 0.5,
            thresholds: Some(thresholds),
        }
    }

    /// Per-margin thresholds for `data`. Derived thresholds are type-7
    /// empirical quantiles.
    pub fn resolve(&self, data: &SampleMatrix) -> Result<Vec<f64>> {
        let q = self.quantile_level;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::param(format!("quantile level {q} outside (0, 1)")));
        }
        if data.nrows() == 0 {
            return Err(Error::InsufficientData {
                what: "rows",
                needed: 1,
                got: 0,
            });
        }
        match &self.thresholds {
            Some(u) if u.len() != data.ncols() => Err(Error::Shape(format!(
                "{} thresholds for {} columns",
                u.len(),
                data.ncols()
            ))),
            Some(u) if u.iter().any(|v| !v.is_finite()) => {
                Err(Error::param("thresholds must be finite"))
            }
            Some(u) => Ok(u.clone()),
            None => Ok((0..data.ncols())
                .map(|j| stats::quantile(&data.column(j).to_vec(), q))
                .collect()),
        }
    }
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        Self::quantile(0.9)
    }
}

/// Rows of `Y − u` for which `Y ≰ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeEvents {
    pub exceedances: SampleMatrix,
    pub event_indices: Vec<usize>,
    pub thresholds: Vec<f64>,
}

/// Select the rows where at least one component exceeds its threshold and
/// shift them by the thresholds.
///
/// ```
/// use extremal_causality::margins::{select_extreme_events, ThresholdSpec};
/// use extremal_causality::SampleMatrix;
///
/// let data = SampleMatrix::from_rows(&[
///     vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 5.0], vec![5.0, 5.0],
/// ]).unwrap();
/// let ev = select_extreme_events(&data, &ThresholdSpec::explicit(vec![1.0, 1.0])).unwrap();
/// assert_eq!(ev.event_indices, vec![1, 2, 3]);
/// assert_eq!(ev.exceedances.values().row(0).to_vec(), vec![4.0, -1.0]);
/// ```
pub fn select_extreme_events(data: &SampleMatrix, spec: &ThresholdSpec) -> Result<ExtremeEvents> {
    let thresholds = spec.resolve(data)?;
    let event_indices: Vec<usize> = data
        .values()
        .outer_iter()
        .enumerate()
        .filter(|(_, row)| row.iter().zip(&thresholds).any(|(y, u)| y > u))
        .map(|(i, _)| i)
        .collect();
    if event_indices.is_empty() {
        return Err(Error::NoExtremeEvents);
    }
    let mut shifted = data.select_rows(&event_indices).into_parts().0;
    for (mut col, u) in shifted.columns_mut().into_iter().zip(&thresholds) {
        col.mapv_inplace(|y| y - u);
    }
    Ok(ExtremeEvents {
        exceedances: SampleMatrix::new(shifted, data.names().to_vec())?,
        event_indices,
        thresholds,
    })
}

/// How margins reach the standard Pareto scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMethod {
    /// Empirical ranks over the full sample.
    #[default]
    Rank,
    /// Fitted generalized Pareto margins.
    #[serde(alias = "gpfit", alias = "gp-fit")]
    GpFit,
}

impl FromStr for TransformMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank" => Ok(Self::Rank),
            "gpfit" | "gp_fit" | "gp-fit" => Ok(Self::GpFit),
            other => Err(Error::param(format!(
                "unknown transform '{other}' (expected rank or gpfit)"
            ))),
        }
    }
}

/// Result of [`to_standard_pareto`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoTransform {
    pub events: StandardParetoMatrix,
    pub thresholds: Vec<f64>,
    /// Per-margin fits, present for [`TransformMethod::GpFit`].
    pub fits: Option<Vec<GpMarginFit>>,
}

/// Transform the extreme events of `data` to the standard Pareto scale.
///
/// With [`TransformMethod::Rank`], margin `j` is mapped through its average
/// ranks `r` as `−ln(1 − r/(n+1))`, then shifted so that exactly the values
/// above `u_j` land on `(0, ∞)`: the shift is the same map evaluated at
/// `c_j + ½`, where `c_j` counts the observations not above `u_j`.
///
/// With [`TransformMethod::GpFit`], each margin's positive exceedances are
/// fitted and `z = y − u` becomes `ln(1 + ξ z / σ) / ξ`, with the argument
/// floored at [`GP_SUPPORT_FLOOR`].
pub fn to_standard_pareto(
    data: &SampleMatrix,
    spec: &ThresholdSpec,
    method: TransformMethod,
) -> Result<ParetoTransform> {
    let ev = select_extreme_events(data, spec)?;
    let names = data.names().to_vec();
    match method {
        TransformMethod::Rank => rank_transform(data, ev, names),
        TransformMethod::GpFit => gp_transform(data, ev, names),
    }
}

/// Exponential score `−ln(1 − r/(n+1))` of rank `r` among `n` values.
pub(crate) fn rank_to_exponential(r: f64, n: usize) -> f64 {
    -(-r / (n + 1) as f64).ln_1p()
}

fn rank_transform(data: &SampleMatrix, ev: ExtremeEvents, names: Vec<String>) -> Result<ParetoTransform> {
    let n = data.nrows();
    let to_exp = |r: f64| rank_to_exponential(r, n);
    let m = ev.event_indices.len();
    let mut out = Array2::zeros((m, data.ncols()));
    let mut warnings = Vec::new();
    for (j, &u) in ev.thresholds.iter().enumerate() {
        let col = data.column(j).to_vec();
        let ranks = stats::average_ranks(&col);
        let below = col.iter().filter(|&&y| y <= u).count();
        let shift = to_exp(below as f64 + 0.5);
        for (k, &i) in ev.event_indices.iter().enumerate() {
            out[[k, j]] = to_exp(ranks[i]) - shift;
        }
        let tie = stats::largest_tie(&col);
        if tie as f64 > TIE_WARNING_SHARE * n as f64 {
            warnings.push(format!(
                "margin '{}': {tie} of {n} values are identical; rank transform is unreliable",
                names[j]
            ));
        }
    }
    let events = StandardParetoMatrix::new(out, ev.event_indices, names)?.with_warnings(warnings);
    Ok(ParetoTransform {
        events,
        thresholds: ev.thresholds,
        fits: None,
    })
}

fn gp_transform(data: &SampleMatrix, ev: ExtremeEvents, names: Vec<String>) -> Result<ParetoTransform> {
    let mut fits = Vec::with_capacity(data.ncols());
    for (j, &u) in ev.thresholds.iter().enumerate() {
        let exceed: Vec<f64> = data
            .column(j)
            .iter()
            .map(|y| y - u)
            .filter(|&z| z > 0.0)
            .collect();
        fits.push(fit_gp_margin(&exceed)?.with_threshold(u));
    }
    let z = ev.exceedances.values();
    let mut out = Array2::zeros(z.raw_dim());
    let mut warnings = Vec::new();
    for (j, fit) in fits.iter().enumerate() {
        let mut clamped = 0;
        for i in 0..z.nrows() {
            let zi = z[[i, j]];
            if fit.xi.abs() >= 1e-10 && 1.0 + fit.xi * zi / fit.sigma <= GP_SUPPORT_FLOOR {
                clamped += 1;
            }
            out[[i, j]] = fit.to_exponential_scale(zi, GP_SUPPORT_FLOOR);
        }
        if clamped > 0 {
            warnings.push(format!(
                "margin '{}': {clamped} event rows outside the fitted support were floored",
                names[j]
            ));
        }
        if !fit.reliable {
            warnings.push(format!(
                "margin '{}': only {} exceedances, fit not reliable",
                names[j], fit.n_exceed
            ));
        }
    }
    let events = StandardParetoMatrix::new(out, ev.event_indices, names)?.with_warnings(warnings);
    Ok(ParetoTransform {
        events,
        thresholds: ev.thresholds,
        fits: Some(fits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[Vec<f64>]) -> SampleMatrix {
        SampleMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn explicit_threshold_example() {
        let d = data(&[vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 5.0], vec![5.0, 5.0]]);
        let ev = select_extreme_events(&d, &ThresholdSpec::explicit(vec![1.0, 1.0])).unwrap();
        let rows: Vec<Vec<f64>> = ev.exceedances.values().outer_iter().map(|r| r.to_vec()).collect();
        assert_eq!(rows, vec![vec![4.0, -1.0], vec![-1.0, 4.0], vec![4.0, 4.0]]);
    }

    #[test]
    fn no_events_is_an_error() {
        let d = data(&[vec![0.0, 0.0], vec![0.5, 0.2]]);
        assert_eq!(
            select_extreme_events(&d, &ThresholdSpec::explicit(vec![1.0, 1.0])),
            Err(Error::NoExtremeEvents)
        );
    }

    #[test]
    fn quantile_level_validated() {
        let d = data(&[vec![0.0, 0.0], vec![0.5, 0.2]]);
        for q in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                select_extreme_events(&d, &ThresholdSpec::quantile(q)),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn rank_transform_sign_matches_threshold() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![((i * 7) % 40) as f64, ((i * 13) % 40) as f64 * 0.5])
            .collect();
        let d = data(&rows);
        let t = to_standard_pareto(&d, &ThresholdSpec::quantile(0.8), TransformMethod::Rank).unwrap();
        for (k, &i) in t.events.event_indices().iter().enumerate() {
            for j in 0..2 {
                let above = d.values()[[i, j]] > t.thresholds[j];
                assert_eq!(above, t.events.values()[[k, j]] > 0.0);
            }
        }
    }

    #[test]
    fn heavy_ties_warn() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, if i < 15 { 0.0 } else { i as f64 }])
            .collect();
        let t = to_standard_pareto(&data(&rows), &ThresholdSpec::quantile(0.9), TransformMethod::Rank)
            .unwrap();
        assert_eq!(t.events.warnings().len(), 1);
        assert!(t.events.warnings()[0].contains("Y2"));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("rank".parse::<TransformMethod>().unwrap(), TransformMethod::Rank);
        assert_eq!("gpfit".parse::<TransformMethod>().unwrap(), TransformMethod::GpFit);
        assert!("median".parse::<TransformMethod>().is_err());
    }
}
