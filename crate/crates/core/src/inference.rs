//! Bootstrap uncertainty for causal scores and source-node votes.
//!
//! Rows are always resampled whole, so the cross-margin dependence that
//! carries the causal signal survives in every replicate. Two schemes exist:
//!
//! * [`bootstrap_data`] resamples the raw observations and reruns threshold
//!   selection and the marginal transform in every replicate. Each
//!   replicate then goes through exactly the same estimator as the data.
//! * [`bootstrap`] resamples the event rows of an already transformed
//!   matrix. It is cheaper but ignores that the transform fixes the number
//!   of exceedances per margin, so its intervals are conservative.
//!
//! Replicate `b` draws from stream `b` of the configured seed, which makes
//! the result independent of the order in which replicates are evaluated.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margins::{rank_to_exponential, to_standard_pareto, ThresholdSpec, TransformMethod};
use crate::matrix::{SampleMatrix, StandardParetoMatrix};
use crate::samplers::stream_rng;
use crate::score::{margin_distances, rank_from_distances, w1_sorted};
use crate::stats::quantile_sorted;

/// Smallest event count accepted for resampling.
pub const MIN_BOOTSTRAP_EVENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub ci_level: f64,
    pub vote_threshold: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 300,
            ci_level: 0.95,
            vote_threshold: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::param("at least 2 bootstrap replicates are required"));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::param(format!("CI level {} outside (0, 1)", self.ci_level)));
        }
        if !(self.vote_threshold > 0.0 && self.vote_threshold <= 1.0) {
            return Err(Error::param(format!(
                "vote threshold {} outside (0, 1]",
                self.vote_threshold
            )));
        }
        Ok(())
    }
}

/// Percentile interval for one score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreCI {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    /// Zero lies outside `[lo, hi]`.
    pub significant: bool,
}

impl ScoreCI {
    fn from_replicates(point: f64, mut reps: Vec<f64>, level: f64) -> Self {
        reps.sort_by(f64::total_cmp);
        let tail = (1.0 - level) / 2.0;
        let lo = quantile_sorted(&reps, tail);
        let hi = quantile_sorted(&reps, 1.0 - tail);
        Self {
            point,
            lo,
            hi,
            significant: lo > 0.0 || hi < 0.0,
        }
    }
}

/// Source-node majority vote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceVote {
    /// Node reaching the vote threshold, if any.
    pub winner: Option<usize>,
    /// Share of replicates naming each node. Replicates with a tie for the
    /// largest distance abstain, so the shares can sum to less than 1.
    pub fractions: Vec<f64>,
}

/// Both bootstrap products from one set of replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapOutcome {
    /// `intervals[[i, j]]` is the interval for `s(i→j)`.
    pub intervals: Array2<ScoreCI>,
    pub vote: SourceVote,
    /// Replicates that produced scores.
    pub replicates: usize,
    /// Replicates dropped because their transform or fit failed.
    pub failed_replicates: usize,
    pub method: &'static str,
}

fn scores_from(w1: &[f64]) -> Vec<f64> {
    let d = w1.len();
    let max = w1.iter().copied().fold(0.0, f64::max);
    let mut s = vec![0.0; d * d];
    if max > 0.0 {
        for i in 0..d {
            for j in 0..d {
                s[i * d + j] = (w1[i] - w1[j]) / max;
            }
        }
    }
    s
}

/// Distances `W1(X_j, E)` of every replicate, in replicate order.
pub fn replicate_distances(x: &StandardParetoMatrix, cfg: &BootstrapConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let m = x.nrows();
    if m < MIN_BOOTSTRAP_EVENTS {
        return Err(Error::InsufficientData {
            what: "events for the bootstrap",
            needed: MIN_BOOTSTRAP_EVENTS,
            got: m,
        });
    }
    let columns: Vec<Vec<f64>> = (0..x.ncols()).map(|j| x.column(j).to_vec()).collect();
    Ok((0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.seed, b as u64);
            let rows: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
            let mut buf = vec![0.0; m];
            columns
                .iter()
                .map(|col| {
                    for (slot, &r) in buf.iter_mut().zip(&rows) {
                        *slot = col[r];
                    }
                    buf.sort_unstable_by(f64::total_cmp);
                    w1_sorted(&buf)
                })
                .collect()
        })
        .collect())
}

fn summarize(
    point_w1: &[f64],
    reps: &[Vec<f64>],
    failed: usize,
    cfg: &BootstrapConfig,
    method: &'static str,
) -> Result<BootstrapOutcome> {
    if reps.len() < 2 {
        return Err(Error::InsufficientData {
            what: "successful bootstrap replicates",
            needed: 2,
            got: reps.len(),
        });
    }
    let d = point_w1.len();
    let point = scores_from(point_w1);
    let rep_scores: Vec<Vec<f64>> = reps.iter().map(|w| scores_from(w)).collect();
    let intervals = Array2::from_shape_fn((d, d), |(i, j)| {
        let k = i * d + j;
        ScoreCI::from_replicates(point[k], rep_scores.iter().map(|s| s[k]).collect(), cfg.ci_level)
    });

    // a replicate whose largest distance is shared casts no vote
    let mut counts = vec![0usize; d];
    for w in reps {
        let r = rank_from_distances(w);
        if !r.tie {
            counts[r.source_node] += 1;
        }
    }
    let fractions: Vec<f64> = counts.iter().map(|&c| c as f64 / reps.len() as f64).collect();
    let winner = fractions.iter().position(|&f| f >= cfg.vote_threshold);
    Ok(BootstrapOutcome {
        intervals,
        vote: SourceVote { winner, fractions },
        replicates: reps.len(),
        failed_replicates: failed,
        method,
    })
}

/// Percentile intervals and source-node vote from resampled event rows.
pub fn bootstrap(x: &StandardParetoMatrix, cfg: &BootstrapConfig) -> Result<BootstrapOutcome> {
    let reps = replicate_distances(x, cfg)?;
    let point = margin_distances(x)?.distances;
    summarize(&point, &reps, 0, cfg, EVENT_METHOD)
}

pub const EVENT_METHOD: &str = "percentile bootstrap over event rows";
pub const DATA_METHOD: &str = "percentile bootstrap over observations, transform refitted per replicate";

/// Percentile intervals and source-node vote from resampled observations.
/// Every replicate selects its own thresholds and events and redoes the
/// marginal transform; replicates whose transform fails are dropped and
/// counted.
pub fn bootstrap_data(
    data: &SampleMatrix,
    spec: &ThresholdSpec,
    method: TransformMethod,
    cfg: &BootstrapConfig,
) -> Result<BootstrapOutcome> {
    cfg.validate()?;
    let point = to_standard_pareto(data, spec, method)?.events;
    if point.nrows() < MIN_BOOTSTRAP_EVENTS {
        return Err(Error::InsufficientData {
            what: "events for the bootstrap",
            needed: MIN_BOOTSTRAP_EVENTS,
            got: point.nrows(),
        });
    }
    let point_w1 = margin_distances(&point)?.distances;
    let n = data.nrows();
    let fast = (method == TransformMethod::Rank && spec.thresholds.is_none())
        .then(|| RankResampler::new(data, spec.quantile_level));
    let results: Vec<Result<Vec<f64>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.seed, b as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            match &fast {
                Some(r) => r.distances(&rows),
                None => {
                    let x = to_standard_pareto(&data.select_rows(&rows), spec, method)?.events;
                    Ok(margin_distances(&x)?.distances)
                }
            }
        })
        .collect();
    let failed = results.iter().filter(|r| r.is_err()).count();
    let reps: Vec<Vec<f64>> = results.into_iter().filter_map(Result::ok).collect();
    summarize(&point_w1, &reps, failed, cfg, DATA_METHOD)
}

/// Rank-transform replicates without re-sorting. A resample is a vector of
/// multiplicities over the original rows, so walking each column's original
/// sort order yields the resampled order, its quantile and its average ranks
/// in linear time. The arithmetic matches [`to_standard_pareto`] exactly.
struct RankResampler {
    columns: Vec<Vec<f64>>,
    /// Row indices of each column in ascending order of value.
    orders: Vec<Vec<usize>>,
    q: f64,
}

impl RankResampler {
    fn new(data: &SampleMatrix, q: f64) -> Self {
        let columns: Vec<Vec<f64>> = (0..data.ncols()).map(|j| data.column(j).to_vec()).collect();
        let orders = columns
            .iter()
            .map(|col| {
                let mut o: Vec<usize> = (0..col.len()).collect();
                o.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
                o
            })
            .collect();
        Self { columns, orders, q }
    }

    // value at 0-based position `pos` of the resampled sorted column
    fn value_at(col: &[f64], order: &[usize], counts: &[u32], pos: usize) -> f64 {
        let mut seen = 0;
        for &k in order {
            seen += counts[k] as usize;
            if seen > pos {
                return col[k];
            }
        }
        col[*order.last().expect("non-empty column")]
    }

    fn distances(&self, rows: &[usize]) -> Result<Vec<f64>> {
        let n = rows.len();
        let mut counts = vec![0u32; n];
        for &r in rows {
            counts[r] += 1;
        }
        let d = self.columns.len();
        let mut thresholds = Vec::with_capacity(d);
        let mut shifts = Vec::with_capacity(d);
        let mut ranks = vec![vec![0.0; n]; d];
        for j in 0..d {
            let (col, order) = (&self.columns[j], &self.orders[j]);
            let h = (n - 1) as f64 * self.q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let (vlo, vhi) = (
                Self::value_at(col, order, &counts, lo),
                Self::value_at(col, order, &counts, hi),
            );
            let u = vlo + (h - lo as f64) * (vhi - vlo);
            let mut start = 0usize;
            let mut below = 0usize;
            let mut g = 0;
            while g < n {
                let mut end = g + 1;
                while end < n && col[order[end]] == col[order[g]] {
                    end += 1;
                }
                let copies: usize = order[g..end].iter().map(|&k| counts[k] as usize).sum();
                if copies > 0 {
                    let avg = (start + 1 + start + copies) as f64 / 2.0;
                    for &k in &order[g..end] {
                        ranks[j][k] = avg;
                    }
                    if col[order[g]] <= u {
                        below += copies;
                    }
                }
                start += copies;
                g = end;
            }
            thresholds.push(u);
            shifts.push(rank_to_exponential(below as f64 + 0.5, n));
        }
        let event: Vec<bool> = (0..n)
            .map(|k| counts[k] > 0 && (0..d).any(|j| self.columns[j][k] > thresholds[j]))
            .collect();
        if !event.iter().any(|&e| e) {
            return Err(Error::NoExtremeEvents);
        }
        let mut buf = Vec::with_capacity(n);
        Ok((0..d)
            .map(|j| {
                buf.clear();
                for &k in &self.orders[j] {
                    if event[k] {
                        let x = rank_to_exponential(ranks[j][k], n) - shifts[j];
                        buf.extend(std::iter::repeat_n(x, counts[k] as usize));
                    }
                }
                w1_sorted(&buf)
            })
            .collect())
    }
}

/// `d × d` percentile intervals for the pairwise scores.
pub fn bootstrap_scores(x: &StandardParetoMatrix, cfg: &BootstrapConfig) -> Result<Array2<ScoreCI>> {
    Ok(bootstrap(x, cfg)?.intervals)
}

/// Majority vote for the source node across replicates.
pub fn source_node_vote(x: &StandardParetoMatrix, cfg: &BootstrapConfig) -> Result<SourceVote> {
    Ok(bootstrap(x, cfg)?.vote)
}
