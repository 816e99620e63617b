//! Argument parsing and command dispatch for the `excause` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::pipeline::{run_pipeline, write_pairs_csv, PipelineConfig, PipelineReport, Stage, VoteShare, SCHEMA_VERSION};
use crate::simulate::{simulate, SimulateParams};

#[derive(Debug, Parser)]
#[command(name = "excause", version, about = "Extremal causal discovery from threshold exceedances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset and a metadata sidecar.
    Simulate(SimulateArgs),
    /// Distances, point scores and the extremal ordering, without bootstrap.
    Score(PipelineArgs),
    /// Full analysis: scores, bootstrap intervals and the source-node vote.
    Pipeline(PipelineArgs),
    /// Bootstrap majority vote for the source node.
    SourceNode(PipelineArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON report; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Flat pairwise CSV (default: `<output>.pairs.csv`).
    #[arg(long)]
    pub csv_output: Option<PathBuf>,
    /// TOML file with the same keys as the long flags (snake_case); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub threshold_q: Option<f64>,
    /// `rank` or `gpfit`.
    #[arg(long)]
    pub transform: Option<String>,
    /// Odd moving-window length in rows.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Per-column aggregators, e.g. `precip=sum,melt=mean`.
    #[arg(long, value_delimiter = ',')]
    pub aggregate: Vec<String>,
    /// Aggregator for columns not named in `--aggregate`.
    #[arg(long)]
    pub default_aggregate: Option<String>,
    #[arg(long)]
    pub bootstrap_n: Option<usize>,
    /// Confidence level of the bootstrap intervals.
    #[arg(long)]
    pub ci: Option<f64>,
    #[arg(long)]
    pub vote_threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub group_col: Option<String>,
    #[arg(long)]
    pub time_col: Option<String>,
    /// Restrict the analysis to these columns.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Drop rows where all of these columns are zero.
    #[arg(long, value_delimiter = ',')]
    pub zero_filter_cols: Vec<String>,
    #[arg(long)]
    pub score_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Generator tag, e.g. `lscm` or `alog`.
    pub generator: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML file with generator parameters; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub pool_factor: Option<usize>,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Config file (if any) overlaid with the flags that were given.
pub fn pipeline_config(args: PipelineArgs) -> CliResult<PipelineConfig> {
    let mut cfg: PipelineConfig = match &args.config {
        Some(path) => read_toml(path)?,
        None => PipelineConfig::default(),
    };
    if args.input.is_some() {
        cfg.input = args.input;
    }
    if args.output.is_some() {
        cfg.output = args.output;
    }
    if args.csv_output.is_some() {
        cfg.csv_output = args.csv_output;
    }
    if args.group_col.is_some() {
        cfg.group_col = args.group_col;
    }
    if args.time_col.is_some() {
        cfg.time_col = args.time_col;
    }
    if !args.columns.is_empty() {
        cfg.columns = Some(args.columns);
    }
    if !args.zero_filter_cols.is_empty() {
        cfg.zero_filter_cols = args.zero_filter_cols;
    }
    set(&mut cfg.threshold_q, args.threshold_q);
    set(&mut cfg.window, args.window);
    set(&mut cfg.stride, args.stride);
    set(&mut cfg.bootstrap_n, args.bootstrap_n);
    set(&mut cfg.ci, args.ci);
    set(&mut cfg.vote_threshold, args.vote_threshold);
    set(&mut cfg.seed, args.seed);
    set(&mut cfg.score_floor, args.score_floor);
    if let Some(t) = args.transform {
        cfg.transform = t.parse()?;
    }
    if let Some(a) = args.default_aggregate {
        cfg.default_aggregate = a.parse().map_err(CliError::Usage)?;
    }
    for item in args.aggregate {
        let (col, agg) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--aggregate expects column=aggregator, got '{item}'")))?;
        cfg.aggregate
            .insert(col.trim().to_string(), agg.trim().parse().map_err(CliError::Usage)?);
    }
    Ok(cfg)
}

/// Config file (if any) overlaid with the flags that were given.
pub fn simulate_params(args: SimulateArgs) -> CliResult<SimulateParams> {
    let mut p: SimulateParams = match &args.config {
        Some(path) => read_toml(path)?,
        None => SimulateParams::default(),
    };
    macro_rules! overlay {
        ($($field:ident),*) => {
            $(if args.$field.is_some() {
                p.$field = args.$field;
            })*
        };
    }
    overlay!(generator, output, n, seed, beta, xi, gamma, alpha, beta1, beta2, rho, mu, dim, pool_factor);
    if !args.alphas.is_empty() {
        p.alphas = Some(args.alphas);
    }
    Ok(p)
}

/// Compact output of `source-node`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceNodeReport {
    pub schema_version: u32,
    pub tool: String,
    pub source_convention: &'static str,
    pub groups: Vec<SourceNodeGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceNodeGroup {
    pub group: String,
    pub status: &'static str,
    pub error: Option<String>,
    pub variables: Vec<String>,
    /// Source of the full sample.
    pub point_source: Option<String>,
    /// Node reaching the vote threshold, if any.
    pub winner: Option<String>,
    pub fractions: Vec<VoteShare>,
}

impl From<&PipelineReport> for SourceNodeReport {
    fn from(r: &PipelineReport) -> Self {
        let groups = r
            .groups
            .iter()
            .map(|g| {
                let a = g.analysis.as_ref();
                let vote = a.and_then(|a| a.bootstrap.as_ref()).map(|b| &b.vote);
                SourceNodeGroup {
                    group: g.group.clone(),
                    status: g.status,
                    error: g.error.as_ref().map(|e| e.message.clone()),
                    variables: g.variables.clone(),
                    point_source: a.map(|a| a.source_node.clone()),
                    winner: vote.and_then(|v| v.winner.clone()),
                    fractions: vote.map(|v| v.fractions.clone()).unwrap_or_default(),
                }
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            tool: r.tool.clone(),
            source_convention: r.source_convention,
            groups,
        }
    }
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> CliResult<()> {
    let json = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match output {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn pairs_path(cfg: &PipelineConfig) -> Option<PathBuf> {
    cfg.csv_output
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| o.with_extension("pairs.csv")))
}

fn execute(command: Command) -> CliResult<u8> {
    match command {
        Command::Simulate(args) => {
            let p = simulate_params(args)?;
            let tag = p
                .generator
                .clone()
                .ok_or_else(|| CliError::Usage("no generator given; see `excause simulate --help`".into()))?;
            simulate(&tag, &p)?;
            Ok(0)
        }
        Command::Score(args) => {
            let cfg = pipeline_config(args)?;
            let report = run_pipeline(&cfg, Stage::PointScores)?;
            emit(&report, cfg.output.as_deref())?;
            if let Some(path) = pairs_path(&cfg) {
                write_pairs_csv(&path, &report)?;
            }
            Ok(report.exit_code())
        }
        Command::Pipeline(args) => {
            let cfg = pipeline_config(args)?;
            let report = run_pipeline(&cfg, Stage::WithBootstrap)?;
            emit(&report, cfg.output.as_deref())?;
            if let Some(path) = pairs_path(&cfg) {
                write_pairs_csv(&path, &report)?;
            }
            Ok(report.exit_code())
        }
        Command::SourceNode(args) => {
            let cfg = pipeline_config(args)?;
            let report = run_pipeline(&cfg, Stage::WithBootstrap)?;
            emit(&SourceNodeReport::from(&report), cfg.output.as_deref())?;
            Ok(report.exit_code())
        }
    }
}

/// Parse arguments, run the command and return the process exit code:
/// 0 success, 1 usage or configuration error, 2 data error, 3 numerical
/// failure.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
