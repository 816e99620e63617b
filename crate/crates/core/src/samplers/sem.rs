//! Heavy-tailed structural equation models over a DAG.
//!
//! Linear (`Y_j = Σ β_jk Y_k + ε_j`) and recursive max-linear
//! (`Y_j = max(max_k c_kj Y_k, c_jj ε_j)`) models with independent
//! generalized Pareto innovations, `P(ε > z) = (1 + ξ z)^{−1/ξ}` on `z ≥ 0`.

use ndarray::Array2;
use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemKind {
    /// Additive linear structural causal model.
    Lscm,
    /// Recursive max-linear model.
    Rmlm,
}

/// Innovation law shared by all nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// Generalized Pareto with unit scale and shape `ξ` (tail index `1/ξ`),
    /// drawn as `(U^{−ξ} − 1)/ξ`.
    Pareto { xi: f64 },
    /// Deterministic innovation, for tests.
    Constant(f64),
}

/// DAG with weighted edges. `parents[j]` lists `(k, weight)` for each
/// parent `k` of node `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemSpec {
    pub kind: SemKind,
    pub parents: Vec<Vec<(usize, f64)>>,
    /// Innovation weights `c_jj` (max-linear only; 1 by default).
    pub self_weights: Vec<f64>,
    pub noise: Noise,
}

impl SemSpec {
    /// Graph with `d` nodes and no edges.
    pub fn new(kind: SemKind, d: usize, noise: Noise) -> Self {
        Self {
            kind,
            parents: vec![Vec::new(); d],
            self_weights: vec![1.0; d],
            noise,
        }
    }

    /// Add the edge `from → to` with the given weight.
    pub fn edge(mut self, from: usize, to: usize, weight: f64) -> Self {
        self.parents[to].push((from, weight));
        self
    }

    pub fn nodes(&self) -> usize {
        self.parents.len()
    }

    /// `Y_1 = ε_1`, `Y_2 = β Y_1 + ε_2` (or `max(β Y_1, ε_2)`).
    pub fn bivariate(kind: SemKind, beta: f64, xi: f64) -> Self {
        Self::new(kind, 2, Noise::Pareto { xi }).edge(0, 1, beta)
    }

    /// Linear confounder design: `Y_1` drives `Y_2` and `Y_3` with weight
    /// `β`; `link = Some(γ)` adds the direct edge `Y_2 → Y_3`.
    pub fn confounder(beta: f64, xi: f64, link: Option<f64>) -> Self {
        let spec = Self::new(SemKind::Lscm, 3, Noise::Pareto { xi })
            .edge(0, 1, beta)
            .edge(0, 2, beta);
        match link {
            Some(gamma) => spec.edge(1, 2, gamma),
            None => spec,
        }
    }

    pub fn validate(&self) -> Result<Vec<usize>> {
        let d = self.nodes();
        if d == 0 {
            return Err(Error::param("graph has no nodes"));
        }
        if self.self_weights.len() != d {
            return Err(Error::Shape(format!("{} self weights for {d} nodes", self.self_weights.len())));
        }
        for (j, pa) in self.parents.iter().enumerate() {
            for &(k, w) in pa {
                if k >= d {
                    return Err(Error::param(format!("edge {k} → {j} refers to a missing node")));
                }
                if !w.is_finite() {
                    return Err(Error::param(format!("edge {k} → {j} has non-finite weight")));
                }
                if self.kind == SemKind::Rmlm && w <= 0.0 {
                    return Err(Error::param(format!(
                        "max-linear edge {k} → {j} needs a strictly positive weight, got {w}"
                    )));
                }
            }
        }
        if self.kind == SemKind::Rmlm && self.self_weights.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::param("max-linear innovation weights must be strictly positive"));
        }
        match self.noise {
            Noise::Pareto { xi } if !(xi > 0.0 && xi.is_finite()) => {
                return Err(Error::param(format!("Pareto noise shape must be positive, got {xi}")))
            }
            Noise::Constant(c) if !c.is_finite() => return Err(Error::param("constant noise must be finite")),
            _ => {}
        }
        topological_sort(&self.parents)
    }
}

/// Kahn's algorithm over parent lists; errors on a cycle.
pub fn topological_sort(parents: &[Vec<(usize, f64)>]) -> Result<Vec<usize>> {
    let d = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); d];
    for (j, pa) in parents.iter().enumerate() {
        for &(k, _) in pa {
            children[k].push(j);
        }
    }
    let mut ready: Vec<usize> = (0..d).rev().filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(k) = ready.pop() {
        order.push(k);
        for &c in children[k].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() < d {
        let stuck = (0..d).find(|&j| indegree[j] > 0).unwrap_or(0);
        return Err(Error::CyclicGraph(stuck));
    }
    Ok(order)
}

/// `n` draws from the model. Innovations are drawn row by row in node index
/// order, so the output depends only on `(spec, n, seed)`.
pub fn sample_sem(spec: &SemSpec, n: usize, seed: u64) -> Result<SampleMatrix> {
    let order = spec.validate()?;
    let d = spec.nodes();
    let mut rng = seeded_rng(seed);
    let mut out = Array2::zeros((n, d));
    let mut eps = vec![0.0; d];
    for i in 0..n {
        for e in eps.iter_mut() {
            *e = match spec.noise {
                Noise::Pareto { xi } => (rng.sample::<f64, _>(Open01).powf(-xi) - 1.0) / xi,
                Noise::Constant(c) => c,
            };
        }
        for &j in &order {
            let value = match spec.kind {
                SemKind::Lscm => {
                    spec.parents[j].iter().map(|&(k, w)| w * out[[i, k]]).sum::<f64>() + eps[j]
                }
                SemKind::Rmlm => spec.parents[j]
                    .iter()
                    .map(|&(k, w)| w * out[[i, k]])
                    .fold(spec.self_weights[j] * eps[j], f64::max),
            };
            out[[i, j]] = value;
        }
    }
    SampleMatrix::from_array(out)
}
