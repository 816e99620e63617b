//! Wasserstein distances to the unit exponential and the pairwise causal score.
//!
//! A standard Pareto vector can be written `X = E + U − max(U)` with `E` a unit
//! exponential independent of `U`. Every margin is therefore stochastically
//! dominated by `E`, and its distance to `E` measures how often the margin is
//! pulled below the common exponential by the other components. For a pair
//! `(i, j)` the score
//!
//! ```text
//! s(i→j) = (W1(X_i, E) − W1(X_j, E)) / max_k W1(X_k, E)
//! ```
//!
//! is positive when margin `i` is further from `E` than margin `j`, i.e. when
//! extremes of `i` are accompanied by extremes of `j` more often than the
//! reverse. Positive scores read "i is the extremal cause of j".
//!
//! Distances are always computed on the full margin of the event set,
//! negative entries included: the causal signal lives in those negative
//! excursions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::StandardParetoMatrix;

/// Below this largest distance the report is flagged non-identifiable.
pub const MIN_IDENTIFIABLE_W1: f64 = 1e-3;

/// Default floor on `|s(i→j)|` under which every pair counts as "no signal".
pub const DEFAULT_SCORE_FLOOR: f64 = 0.01;

/// Exact 1-Wasserstein distance between the empirical law of `sample` and
/// the unit exponential distribution.
///
/// The integral `∫ |F_n(t) − F_E(t)| dt` is evaluated in closed form over the
/// segments where the empirical CDF is constant. On a segment inside
/// `[0, ∞)` with level `p`, the integrand `|p − 1 + e^{−t}|` changes sign at
/// most once, at `t* = −ln(1 − p)`.
///
/// ```
/// use extremal_causality::score::w1_to_unit_exponential;
///
/// // a point mass at zero is one unit-exponential mean away from E
/// assert_eq!(w1_to_unit_exponential(&[0.0]).unwrap(), 1.0);
/// assert_eq!(w1_to_unit_exponential(&[-1.0]).unwrap(), 2.0);
/// ```
pub fn w1_to_unit_exponential(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::param("Wasserstein distance of an empty sample"));
    }
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::param("NaN in Wasserstein input"));
    }
    if sample.iter().any(|v| v.is_infinite()) {
        return Err(Error::param("infinite value in Wasserstein input"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(w1_sorted(&sorted))
}

/// Same as [`w1_to_unit_exponential`] for an already sorted, finite sample.
pub(crate) fn w1_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut total = 0.0;
    // Walk the breakpoints {x_(k)} ∪ {0}; `below` counts sample points ≤ left end.
    let mut below = 0usize;
    let mut left = sorted[0].min(0.0);
    while below < sorted.len() && sorted[below] <= left {
        below += 1;
    }
    loop {
        let next_point = sorted.get(below).copied();
        let right = match next_point {
            Some(x) if left < 0.0 && x > 0.0 => 0.0,
            Some(x) => x,
            None if left < 0.0 => 0.0,
            None => break,
        };
        total += segment(left, right, below as f64 / n);
        left = right;
        while below < sorted.len() && sorted[below] <= left {
            below += 1;
        }
    }
    // Right of max(x_(n), 0) the empirical CDF is 1: ∫ e^{−t} dt.
    total + (-left).exp()
}

/// `∫_a^b |p − F_E(t)| dt` for a constant empirical level `p`.
fn segment(a: f64, b: f64, p: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if b <= 0.0 {
        return p * (b - a);
    }
    // Segments never straddle zero: zero is a breakpoint.
    debug_assert!(a >= 0.0);
    // signed integral of p − 1 + e^{−t} on [lo, hi]
    let signed = |lo: f64, hi: f64| (p - 1.0) * (hi - lo) + (-lo).exp() * -(-(hi - lo)).exp_m1();
    if p >= 1.0 {
        return signed(a, b);
    }
    let crossing = -(-p).ln_1p();
    if crossing > a && crossing < b {
        signed(a, crossing) - signed(crossing, b)
    } else if crossing <= a {
        // e^{−t} ≤ 1 − p on the whole segment
        -signed(a, b)
    } else {
        signed(a, b)
    }
}

/// Per-margin distances to the unit exponential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1Vector {
    pub distances: Vec<f64>,
    pub sample_sizes: Vec<usize>,
}

impl W1Vector {
    pub fn max(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn column_vec(x: &StandardParetoMatrix, j: usize) -> Vec<f64> {
    x.column(j).to_vec()
}

/// `W1(X_j, E)` for every column of `x`.
pub fn margin_distances(x: &StandardParetoMatrix) -> Result<W1Vector> {
    if x.nrows() == 0 {
        return Err(Error::InsufficientData {
            what: "events",
            needed: 1,
            got: 0,
        });
    }
    let distances = (0..x.ncols())
        .map(|j| w1_to_unit_exponential(&column_vec(x, j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(W1Vector {
        distances,
        sample_sizes: vec![x.nrows(); x.ncols()],
    })
}

/// Score from precomputed distances. Zero when the two distances coincide.
pub fn score_from_distances(w1: &[f64], i: usize, j: usize) -> Result<f64> {
    let max = w1.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::NonIdentifiable { max_w1: max });
    }
    Ok((w1[i] - w1[j]) / max)
}

fn check_pair(x: &StandardParetoMatrix, i: usize, j: usize) -> Result<()> {
    let d = x.ncols();
    if i >= d || j >= d {
        return Err(Error::param(format!("margin index out of range for d={d}")));
    }
    if i == j {
        return Err(Error::param("causal score needs two distinct margins"));
    }
    if x.nrows() < 2 {
        return Err(Error::InsufficientData {
            what: "events",
            needed: 2,
            got: x.nrows(),
        });
    }
    Ok(())
}

/// Causal score `s(i→j)`; positive means `i` is the extremal cause of `j`.
pub fn causal_score(x: &StandardParetoMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(x, i, j)?;
    let w1 = margin_distances(x)?;
    score_from_distances(&w1.distances, i, j)
}

/// `mean(X_j) − mean(X_i)`.
///
/// For an exact standard Pareto vector each margin is dominated by `E`, so
/// `W1(X_i, E) = 1 − E[X_i]` and the gap equals `W1(X_i,E) − W1(X_j,E)`.
pub fn mean_gap(x: &StandardParetoMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(x, i, j)?;
    let m = |k: usize| x.column(k).mean().unwrap_or(0.0);
    Ok(m(j) - m(i))
}

/// Margin ordering from most cause-like to most effect-like.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginRanking {
    /// Margins sorted by decreasing distance to `E`; the first is the source.
    pub topological_order: Vec<usize>,
    pub source_node: usize,
    /// Set when the largest distance is shared by several margins.
    pub tie: bool,
}

/// Order margins from distances. Ties keep the lower index first.
pub fn rank_from_distances(w1: &[f64]) -> MarginRanking {
    let mut order: Vec<usize> = (0..w1.len()).collect();
    order.sort_by(|&a, &b| w1[b].total_cmp(&w1[a]).then(a.cmp(&b)));
    let top = w1[order[0]];
    let tie = order.iter().filter(|&&k| w1[k] == top).count() > 1;
    MarginRanking {
        source_node: order[0],
        topological_order: order,
        tie,
    }
}

/// Topological order and source node. The source is the margin with the
/// LARGEST distance to `E`, so that it has a positive score towards every
/// other margin.
pub fn rank_margins(x: &StandardParetoMatrix) -> Result<MarginRanking> {
    if x.ncols() < 2 {
        return Err(Error::InsufficientData {
            what: "columns",
            needed: 2,
            got: x.ncols(),
        });
    }
    Ok(rank_from_distances(&margin_distances(x)?.distances))
}

/// Everything the point analysis produces for one event set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalScoreReport {
    /// `scores[i][j] = s(i→j)`, zero diagonal.
    pub scores: Vec<Vec<f64>>,
    pub w1: W1Vector,
    pub topological_order: Vec<usize>,
    pub source_node: usize,
    pub tie: bool,
    pub non_identifiable: bool,
    pub source_convention: &'static str,
}

pub const SOURCE_CONVENTION: &str = "source = margin with the largest W1 distance to Exp(1)";

/// Full score matrix, ordering and identifiability flag. `score_floor` is
/// the magnitude below which every pairwise score counts as noise.
pub fn score_report(x: &StandardParetoMatrix, score_floor: f64) -> Result<CausalScoreReport> {
    if x.nrows() < 2 {
        return Err(Error::InsufficientData {
            what: "events",
            needed: 2,
            got: x.nrows(),
        });
    }
    let ranking = rank_margins(x)?;
    let w1 = margin_distances(x)?;
    let d = x.ncols();
    let max = w1.max();
    if max <= 0.0 {
        return Err(Error::NonIdentifiable { max_w1: max });
    }
    let scores: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (w1.distances[i] - w1.distances[j]) / max)
                .collect()
        })
        .collect();
    let all_small = scores.iter().flatten().all(|s| s.abs() < score_floor);
    Ok(CausalScoreReport {
        scores,
        non_identifiable: max < MIN_IDENTIFIABLE_W1 || all_small,
        w1,
        topological_order: ranking.topological_order,
        source_node: ranking.source_node,
        tie: ranking.tie,
        source_convention: SOURCE_CONVENTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn spm(values: ndarray::Array2<f64>) -> StandardParetoMatrix {
        StandardParetoMatrix::from_array(values).unwrap()
    }

    #[test]
    fn point_masses() {
        assert_eq!(w1_to_unit_exponential(&[0.0]).unwrap(), 1.0);
        assert_eq!(w1_to_unit_exponential(&[-1.0]).unwrap(), 2.0);
        let ln2 = std::f64::consts::LN_2;
        assert_abs_diff_eq!(w1_to_unit_exponential(&[ln2]).unwrap(), ln2, epsilon = 1e-15);
    }

    #[test]
    fn all_positive_sample_counts_the_gap_near_zero() {
        // point mass at 2: ∫_0^2 (1 − e^{−t}) dt + ∫_2^∞ e^{−t} dt = 2 − 1 + 2e^{−2}
        let expect = 1.0 + 2.0 * (-2.0f64).exp();
        assert_abs_diff_eq!(w1_to_unit_exponential(&[2.0]).unwrap(), expect, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(w1_to_unit_exponential(&[]), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            w1_to_unit_exponential(&[1.0, f64::NAN]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn identical_columns_score_zero() {
        let x = spm(array![[1.0, 1.0], [0.5, 0.5], [2.0, 2.0]]);
        assert_eq!(causal_score(&x, 0, 1).unwrap(), 0.0);
        assert_eq!(mean_gap(&x, 0, 1).unwrap(), 0.0);
        let r = score_report(&x, DEFAULT_SCORE_FLOOR).unwrap();
        assert!(r.tie);
        assert_eq!(r.source_node, 0);
        assert!(r.non_identifiable);
    }

    #[test]
    fn mean_gap_arithmetic() {
        let x = spm(array![[0.5, -1.0], [0.5, -1.0], [3.0, 3.0]]);
        assert_abs_diff_eq!(mean_gap(&x, 0, 1).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn score_antisymmetry_and_bounds() {
        let x = spm(array![[1.0, -0.3, 0.2], [0.4, 2.0, -1.0], [-2.0, 0.1, 0.7]]);
        let r = score_report(&x, DEFAULT_SCORE_FLOOR).unwrap();
        for i in 0..3 {
            assert_eq!(r.scores[i][i], 0.0);
            for j in 0..3 {
                assert_eq!(r.scores[i][j], -r.scores[j][i]);
                assert!(r.scores[i][j].abs() <= 2.0);
            }
        }
        assert_eq!(r.topological_order[0], r.source_node);
    }

    #[test]
    fn shifted_margin_is_the_source() {
        // column 2 = column 1 − 0.5 sits further from Exp(1)
        let e = [0.1, 0.7, 1.3, 2.2, 0.05, 3.1];
        let rows: Vec<f64> = e.iter().flat_map(|&v| [v, v - 0.5]).collect();
        let x = spm(ndarray::Array2::from_shape_vec((6, 2), rows).unwrap());
        let r = rank_margins(&x).unwrap();
        assert_eq!(r.source_node, 1);
        assert!(!r.tie);
        assert!(causal_score(&x, 1, 0).unwrap() > 0.0);
    }

    #[test]
    fn pair_validation() {
        let x = spm(array![[1.0, 1.0], [0.5, 0.5]]);
        assert!(causal_score(&x, 0, 0).is_err());
        assert!(causal_score(&x, 0, 5).is_err());
        let one = spm(array![[1.0, 1.0]]);
        assert!(matches!(
            causal_score(&one, 0, 1),
            Err(Error::InsufficientData { .. })
        ));
    }
}
