//! Reproducible synthetic datasets with a JSON metadata sidecar.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use extremal_causality::samplers::{
    sample_asym_logistic, sample_mgp, sample_sem, stream_rng, CopulaSpec, Latent, MgpSpec, SemKind, SemSpec,
};
use extremal_causality::SampleMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ingest::write_csv;
use crate::pipeline::SCHEMA_VERSION;

/// Generator tags accepted by `simulate`.
pub const GENERATOR_TAGS: [&str; 10] = [
    "lscm",
    "rmlm",
    "confounder",
    "confounder-link",
    "alog",
    "logistic",
    "mgp-normal",
    "mgp-hr",
    "mgp-dirichlet",
    "mgp-gumbel",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorTag {
    Lscm,
    Rmlm,
    Confounder,
    ConfounderLink,
    Alog,
    Logistic,
    MgpNormal,
    MgpHr,
    MgpDirichlet,
    MgpGumbel,
}

impl FromStr for GeneratorTag {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "lscm" => Self::Lscm,
            "rmlm" => Self::Rmlm,
            "confounder" => Self::Confounder,
            "confounder-link" => Self::ConfounderLink,
            "alog" => Self::Alog,
            "logistic" => Self::Logistic,
            "mgp-normal" => Self::MgpNormal,
            "mgp-hr" => Self::MgpHr,
            "mgp-dirichlet" => Self::MgpDirichlet,
            "mgp-gumbel" => Self::MgpGumbel,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown generator '{other}'; valid generators: {}",
                    GENERATOR_TAGS.join(", ")
                )))
            }
        })
    }
}

/// Generator parameters; unset values fall back to per-generator defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub generator: Option<String>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Edge weight of the structural models.
    pub beta: Option<f64>,
    /// Noise shape of the structural models.
    pub xi: Option<f64>,
    /// Direct `Y2 → Y3` weight for `confounder-link`; drawn from `[0.1, 3]` when unset.
    pub gamma: Option<f64>,
    /// Copula dependence, or the Gumbel latent scale.
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    /// Correlation and second mean of the bivariate normal latents.
    pub rho: Option<f64>,
    pub mu: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub dim: Option<usize>,
    pub pool_factor: Option<usize>,
}

/// Fully resolved description of a generator, echoed in the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Sem { spec: SemSpec },
    Copula { spec: CopulaSpec },
    Mgp { spec: MgpSpec },
}

/// Contents of the `.meta.json` file written next to the data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMeta {
    pub schema_version: u32,
    pub generator: String,
    pub n: usize,
    pub seed: u64,
    pub columns: Vec<String>,
    pub parameters: GeneratorSpec,
}

fn bivariate_cov(rho: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0, rho], vec![rho, 1.0]]
}

/// Resolve defaults into a concrete generator.
pub fn resolve(tag: GeneratorTag, p: &SimulateParams, seed: u64) -> CliResult<GeneratorSpec> {
    let xi = p.xi.unwrap_or(0.1);
    let rho = p.rho.unwrap_or(0.0);
    let mu = p.mu.unwrap_or(0.0);
    Ok(match tag {
        GeneratorTag::Lscm => GeneratorSpec::Sem {
            spec: SemSpec::bivariate(SemKind::Lscm, p.beta.unwrap_or(1.2), xi),
        },
        GeneratorTag::Rmlm => GeneratorSpec::Sem {
            spec: SemSpec::bivariate(SemKind::Rmlm, p.beta.unwrap_or(1.2), xi),
        },
        GeneratorTag::Confounder => GeneratorSpec::Sem {
            spec: SemSpec::confounder(p.beta.unwrap_or(1.0), xi, None),
        },
        GeneratorTag::ConfounderLink => {
            // stream 1 of the seed is reserved for the link weight
            let gamma = p.gamma.unwrap_or_else(|| stream_rng(seed, 1).random_range(0.1..=3.0));
            GeneratorSpec::Sem {
                spec: SemSpec::confounder(p.beta.unwrap_or(1.0), xi, Some(gamma)),
            }
        }
        GeneratorTag::Alog => GeneratorSpec::Copula {
            spec: CopulaSpec {
                alpha: p.alpha.unwrap_or(0.3),
                beta1: p.beta1.unwrap_or(0.8),
                beta2: p.beta2.unwrap_or(0.2),
            },
        },
        GeneratorTag::Logistic => GeneratorSpec::Copula {
            spec: CopulaSpec::symmetric(p.alpha.unwrap_or(0.3)),
        },
        GeneratorTag::MgpNormal => GeneratorSpec::Mgp {
            spec: MgpSpec::u_rep(Latent::normal(vec![0.0, mu], bivariate_cov(rho))?),
        },
        GeneratorTag::MgpHr => GeneratorSpec::Mgp {
            spec: MgpSpec::t_rep(Latent::husler_reiss(vec![0.0, mu], bivariate_cov(rho))?),
        },
        GeneratorTag::MgpDirichlet => GeneratorSpec::Mgp {
            spec: MgpSpec::t_rep(Latent::dirichlet(p.alphas.clone().unwrap_or_else(|| vec![1.0, 2.0]))?),
        },
        GeneratorTag::MgpGumbel => GeneratorSpec::Mgp {
            spec: MgpSpec::t_rep(Latent::gumbel(p.alpha.unwrap_or(2.0), p.dim.unwrap_or(2))?),
        },
    })
    .map(|g| match (g, p.pool_factor) {
        (GeneratorSpec::Mgp { mut spec }, Some(f)) => {
            spec.pool_factor = f;
            GeneratorSpec::Mgp { spec }
        }
        (g, _) => g,
    })
}

/// Draw `n` rows from a resolved generator.
pub fn generate(spec: &GeneratorSpec, n: usize, seed: u64) -> CliResult<SampleMatrix> {
    if n == 0 {
        return Err(CliError::Usage("sample size must be at least 1".into()));
    }
    Ok(match spec {
        GeneratorSpec::Sem { spec } => sample_sem(spec, n, seed)?,
        GeneratorSpec::Copula { spec } => sample_asym_logistic(spec, n, seed)?,
        GeneratorSpec::Mgp { spec } => {
            let x = sample_mgp(spec, n, seed)?.x;
            let names = x.names().to_vec();
            SampleMatrix::new(x.values().clone(), names)?
        }
    })
}

/// `data.csv` → `data.meta.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("meta.json")
}

/// Generate, then write the CSV and its sidecar. Returns the sidecar content.
pub fn simulate(tag_name: &str, p: &SimulateParams) -> CliResult<SimulationMeta> {
    let tag: GeneratorTag = tag_name.parse()?;
    let output = p
        .output
        .as_deref()
        .ok_or_else(|| CliError::Usage("no output file given (--output)".into()))?;
    let n = p.n.unwrap_or(10_000);
    let seed = p.seed.unwrap_or(0);
    let spec = resolve(tag, p, seed)?;
    let data = generate(&spec, n, seed)?;
    write_csv(output, &data)?;
    let meta = SimulationMeta {
        schema_version: SCHEMA_VERSION,
        generator: tag_name.to_string(),
        n,
        seed,
        columns: data.names().to_vec(),
        parameters: spec,
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    let side = sidecar_path(output);
    std::fs::write(&side, json + "\n")
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", side.display())))?;
    Ok(meta)
}
