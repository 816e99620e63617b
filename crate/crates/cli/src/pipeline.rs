//! Per-group analysis: window, zero-filter, events, transform, scores,
//! bootstrap.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use extremal_causality::inference::{bootstrap_data, BootstrapConfig};
use extremal_causality::margins::{to_standard_pareto, GpMarginFit, ThresholdSpec, TransformMethod};
use extremal_causality::score::{score_report, SOURCE_CONVENTION};
use extremal_causality::SampleMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest_csv, Dataset, IngestOptions};
use crate::window::{apply_windows, Aggregator, WindowConfig};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything a pipeline run needs. Loaded from TOML, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Flat pairwise CSV; defaults to `<output>.pairs.csv` next to the report.
    pub csv_output: Option<PathBuf>,
    pub group_col: Option<String>,
    pub time_col: Option<String>,
    pub columns: Option<Vec<String>>,
    pub window: usize,
    pub stride: usize,
    /// Per-column aggregators; unlisted columns use `default_aggregate`.
    pub aggregate: BTreeMap<String, Aggregator>,
    pub default_aggregate: Aggregator,
    pub zero_filter_cols: Vec<String>,
    pub threshold_q: f64,
    pub transform: TransformMethod,
    pub bootstrap_n: usize,
    pub ci: f64,
    pub vote_threshold: f64,
    pub seed: u64,
    pub score_floor: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            csv_output: None,
            group_col: None,
            time_col: None,
            columns: None,
            window: 3,
            stride: 1,
            aggregate: BTreeMap::new(),
            default_aggregate: Aggregator::Center,
            zero_filter_cols: Vec::new(),
            threshold_q: 0.9,
            transform: TransformMethod::Rank,
            bootstrap_n: 300,
            ci: 0.95,
            vote_threshold: 0.95,
            seed: 0,
            score_floor: extremal_causality::score::DEFAULT_SCORE_FLOOR,
        }
    }
}

impl PipelineConfig {
    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig {
            replicates: self.bootstrap_n,
            ci_level: self.ci,
            vote_threshold: self.vote_threshold,
            seed: self.seed,
        }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            group_col: self.group_col.clone(),
            time_col: self.time_col.clone(),
            columns: self.columns.clone(),
        }
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> CliResult<()> {
        if self.input.is_none() {
            return Err(CliError::Usage("no input file given (--input or `input` in the config)".into()));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(CliError::Usage(format!("window length must be odd and at least 1, got {}", self.window)));
        }
        if self.stride == 0 {
            return Err(CliError::Usage("window stride must be at least 1".into()));
        }
        if !(self.threshold_q > 0.0 && self.threshold_q < 1.0) {
            return Err(CliError::Usage(format!("threshold quantile {} outside (0, 1)", self.threshold_q)));
        }
        self.bootstrap_config().validate()?;
        Ok(())
    }

    /// Checks against the header of the loaded data.
    fn check_columns(&self, data: &Dataset) -> CliResult<()> {
        let referenced = self.zero_filter_cols.iter().chain(self.aggregate.keys());
        for name in referenced {
            if !data.names.contains(name) {
                return Err(CliError::Usage(format!(
                    "column '{name}' is not a value column of the input (have {:?})",
                    data.names
                )));
            }
        }
        Ok(())
    }

    fn window_for(&self, names: &[String]) -> WindowConfig {
        WindowConfig {
            length: self.window,
            aggregators: names
                .iter()
                .map(|n| self.aggregate.get(n).copied().unwrap_or(self.default_aggregate))
                .collect(),
            stride: self.stride,
        }
    }
}

/// Whether to run the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    PointScores,
    WithBootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub kind: &'static str,
    pub exit_code: u8,
    pub message: String,
}

impl From<&CliError> for ErrorEntry {
    fn from(e: &CliError) -> Self {
        Self {
            kind: e.kind(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub variable: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RowCounts {
    pub input: usize,
    pub after_windows: Option<usize>,
    pub after_zero_filter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInterval {
    pub cause: String,
    pub effect: String,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteShare {
    pub variable: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteReport {
    pub winner: Option<String>,
    pub fractions: Vec<VoteShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSection {
    pub method: &'static str,
    pub replicates: usize,
    pub failed_replicates: usize,
    pub ci_level: f64,
    pub vote_threshold: f64,
    pub seed: u64,
    pub intervals: Vec<PairInterval>,
    pub vote: VoteReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub n_events: usize,
    pub thresholds: Vec<f64>,
    pub w1: Vec<f64>,
    /// `scores[i][j] = s(i→j)` over `variables`.
    pub scores: Vec<Vec<f64>>,
    pub topological_order: Vec<String>,
    pub source_node: String,
    pub tie: bool,
    pub non_identifiable: bool,
    pub fits: Option<Vec<GpMarginFit>>,
    pub bootstrap: Option<BootstrapSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub group: String,
    pub status: &'static str,
    pub error: Option<ErrorEntry>,
    pub variables: Vec<String>,
    pub excluded_variables: Vec<Exclusion>,
    pub rows: RowCounts,
    pub warnings: Vec<String>,
    pub analysis: Option<Analysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub tool: String,
    pub source_convention: &'static str,
    pub config: PipelineConfig,
    pub groups: Vec<GroupReport>,
}

impl PipelineReport {
    /// 0 when at least one group was analysed, otherwise the code of the
    /// first group error.
    pub fn exit_code(&self) -> u8 {
        if self.groups.iter().any(|g| g.error.is_none()) {
            return 0;
        }
        self.groups
            .iter()
            .find_map(|g| g.error.as_ref().map(|e| e.exit_code))
            .unwrap_or(2)
    }
}

/// Drop listed columns that are zero throughout, then rows where every
/// remaining listed column is zero.
fn zero_filter(data: SampleMatrix, cols: &[String], report: &mut GroupReport) -> CliResult<SampleMatrix> {
    if cols.is_empty() {
        return Ok(data);
    }
    let names = data.names().to_vec();
    let idx = |name: &String| names.iter().position(|n| n == name).expect("checked against header");
    let all_zero: Vec<usize> = cols
        .iter()
        .map(idx)
        .filter(|&j| data.column(j).iter().all(|&v| v == 0.0))
        .collect();
    for &j in &all_zero {
        report.excluded_variables.push(Exclusion {
            variable: names[j].clone(),
            reason: "all values zero in this group".into(),
        });
    }
    let keep: Vec<usize> = (0..names.len()).filter(|j| !all_zero.contains(j)).collect();
    let data = data.select_columns(&keep);
    let kept_names = data.names().to_vec();
    let filter: Vec<usize> = cols
        .iter()
        .filter_map(|c| kept_names.iter().position(|n| n == c))
        .collect();
    if filter.is_empty() {
        return Ok(data);
    }
    let rows: Vec<usize> = (0..data.nrows())
        .filter(|&i| filter.iter().any(|&j| data.values()[[i, j]] != 0.0))
        .collect();
    Ok(data.select_rows(&rows))
}

fn analyse(data: SampleMatrix, cfg: &PipelineConfig, stage: Stage, report: &mut GroupReport) -> CliResult<Analysis> {
    let windowed = apply_windows(&data, &cfg.window_for(data.names()))?;
    report.rows.after_windows = Some(windowed.nrows());
    let filtered = zero_filter(windowed, &cfg.zero_filter_cols, report)?;
    report.rows.after_zero_filter = Some(filtered.nrows());
    report.variables = filtered.names().to_vec();
    if filtered.ncols() < 2 {
        return Err(CliError::Data(format!(
            "{} variable(s) left after exclusions; at least 2 are needed",
            filtered.ncols()
        )));
    }
    if filtered.nrows() == 0 {
        return Err(CliError::Data("no rows left after zero filtering".into()));
    }

    let spec = ThresholdSpec::quantile(cfg.threshold_q);
    let transformed = to_standard_pareto(&filtered, &spec, cfg.transform)?;
    let x = &transformed.events;
    report.warnings.extend(x.warnings().iter().cloned());
    let point = score_report(x, cfg.score_floor)?;
    let names = x.names().to_vec();

    let bootstrap = match stage {
        Stage::PointScores => None,
        Stage::WithBootstrap => {
            let bc = cfg.bootstrap_config();
            let out = bootstrap_data(&filtered, &spec, cfg.transform, &bc)?;
            let d = names.len();
            let mut intervals = Vec::with_capacity(d * (d - 1));
            for i in 0..d {
                for j in (0..d).filter(|&j| j != i) {
                    let ci = out.intervals[[i, j]];
                    intervals.push(PairInterval {
                        cause: names[i].clone(),
                        effect: names[j].clone(),
                        point: ci.point,
                        lo: ci.lo,
                        hi: ci.hi,
                        significant: ci.significant,
                    });
                }
            }
            Some(BootstrapSection {
                method: out.method,
                replicates: out.replicates,
                failed_replicates: out.failed_replicates,
                ci_level: bc.ci_level,
                vote_threshold: bc.vote_threshold,
                seed: bc.seed,
                intervals,
                vote: VoteReport {
                    winner: out.vote.winner.map(|k| names[k].clone()),
                    fractions: names
                        .iter()
                        .zip(&out.vote.fractions)
                        .map(|(n, &f)| VoteShare {
                            variable: n.clone(),
                            fraction: f,
                        })
                        .collect(),
                },
            })
        }
    };

    Ok(Analysis {
        n_events: x.nrows(),
        thresholds: transformed.thresholds.clone(),
        w1: point.w1.distances.clone(),
        scores: point.scores,
        topological_order: point.topological_order.iter().map(|&k| names[k].clone()).collect(),
        source_node: names[point.source_node].clone(),
        tie: point.tie,
        non_identifiable: point.non_identifiable,
        fits: transformed.fits,
        bootstrap,
    })
}

/// Analyse one group; failures are recorded in the returned report.
pub fn analyse_group(group: &str, data: SampleMatrix, cfg: &PipelineConfig, stage: Stage) -> GroupReport {
    let mut report = GroupReport {
        group: group.to_string(),
        status: "ok",
        error: None,
        variables: data.names().to_vec(),
        excluded_variables: Vec::new(),
        rows: RowCounts {
            input: data.nrows(),
            ..Default::default()
        },
        warnings: Vec::new(),
        analysis: None,
    };
    match analyse(data, cfg, stage, &mut report) {
        Ok(a) => report.analysis = Some(a),
        Err(e) => {
            report.status = "error";
            report.error = Some(ErrorEntry::from(&e));
        }
    }
    report
}

/// Load the input and analyse every group, sorted by group label. Errors
/// before the per-group stage (bad config, unreadable file) abort the run.
pub fn run_pipeline(cfg: &PipelineConfig, stage: Stage) -> CliResult<PipelineReport> {
    cfg.validate()?;
    let input = cfg.input.as_deref().expect("validated");
    let data = ingest_csv(input, &cfg.ingest_options())?;
    cfg.check_columns(&data)?;
    let groups = data
        .by_group()?
        .into_iter()
        .map(|(g, m)| analyse_group(&g, m, cfg, stage))
        .collect();
    Ok(PipelineReport {
        schema_version: SCHEMA_VERSION,
        tool: format!("excause {}", env!("CARGO_PKG_VERSION")),
        source_convention: SOURCE_CONVENTION,
        config: cfg.clone(),
        groups,
    })
}

/// Header of the flat pairwise CSV.
pub const PAIR_COLUMNS: [&str; 10] = [
    "group",
    "cause",
    "effect",
    "score",
    "ci_lo",
    "ci_hi",
    "significant",
    "w1_cause",
    "w1_effect",
    "n_events",
];

/// One CSV record per ordered pair of every analysed group. Interval columns
/// are empty when no bootstrap was run.
pub fn pair_records(report: &PipelineReport) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for g in &report.groups {
        let Some(a) = &g.analysis else { continue };
        let d = g.variables.len();
        let mut ci = a.bootstrap.as_ref().map(|b| b.intervals.iter());
        for i in 0..d {
            for j in (0..d).filter(|&j| j != i) {
                let interval = ci.as_mut().and_then(|it| it.next());
                let (lo, hi, sig) = match interval {
                    Some(c) => (c.lo.to_string(), c.hi.to_string(), c.significant.to_string()),
                    None => (String::new(), String::new(), String::new()),
                };
                out.push(vec![
                    g.group.clone(),
                    g.variables[i].clone(),
                    g.variables[j].clone(),
                    a.scores[i][j].to_string(),
                    lo,
                    hi,
                    sig,
                    a.w1[i].to_string(),
                    a.w1[j].to_string(),
                    a.n_events.to_string(),
                ]);
            }
        }
    }
    out
}

pub fn write_pairs_csv(path: &Path, report: &PipelineReport) -> CliResult<()> {
    let fail = |e: csv::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(PAIR_COLUMNS).map_err(fail)?;
    for rec in pair_records(report) {
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(names: &[&str], rows: &[Vec<f64>]) -> SampleMatrix {
        let m = SampleMatrix::from_rows(rows).unwrap();
        SampleMatrix::new(m.values().clone(), names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn blank(data: &SampleMatrix) -> GroupReport {
        analyse_group("g", data.select_rows(&[]), &PipelineConfig::default(), Stage::PointScores)
    }

    #[test]
    fn zero_filter_drops_rows_where_all_listed_are_zero() {
        let data = matrix(
            &["p", "s", "q"],
            &[vec![1.0, 0.0, 2.0], vec![2.0, 1.0, 0.0], vec![3.0, 0.0, 0.0], vec![4.0, 2.0, 1.0]],
        );
        let mut r = blank(&data);
        let out = zero_filter(data, &["s".into(), "q".into()], &mut r).unwrap();
        assert_eq!(out.column(0).to_vec(), vec![1.0, 2.0, 4.0]);
        assert!(r.excluded_variables.is_empty());
    }

    #[test]
    fn all_zero_column_is_excluded_not_used_as_filter() {
        let data = matrix(&["p", "s", "q"], &[vec![1.0, 0.0, 2.0], vec![2.0, 0.0, 0.0]]);
        let mut r = blank(&data);
        let out = zero_filter(data, &["s".into()], &mut r).unwrap();
        assert_eq!(out.names(), &["p".to_string(), "q".to_string()]);
        assert_eq!(out.nrows(), 2);
        assert_eq!(r.excluded_variables[0].variable, "s");
    }

    #[test]
    fn exit_code_reflects_total_failure_only() {
        let ok = GroupReport {
            error: None,
            ..blank(&matrix(&["a", "b"], &[vec![1.0, 2.0]]))
        };
        let bad = blank(&matrix(&["a", "b"], &[vec![1.0, 2.0]]));
        assert!(bad.error.is_some());
        let mut report = PipelineReport {
            schema_version: SCHEMA_VERSION,
            tool: String::new(),
            source_convention: SOURCE_CONVENTION,
            config: PipelineConfig::default(),
            groups: vec![bad.clone(), ok],
        };
        assert_eq!(report.exit_code(), 0);
        report.groups = vec![bad.clone()];
        assert_eq!(report.exit_code(), bad.error.unwrap().exit_code);
    }
}
