//! Standard Pareto vectors `X = E + U − max(U)`.
//!
//! The U-representation takes any latent `U` directly. The T-representation
//! starts from a latent density `f_T` with `E[e^{T_j}] < ∞`; the implied
//! U-density is `f_U(u) ∝ e^{max u} f_T(u)`, realized here by
//! self-normalized importance resampling of a pool of `T` draws.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{seeded_rng, SimRng};
use crate::error::{Error, Result};
use crate::matrix::StandardParetoMatrix;

/// Default ratio of pool size to requested sample size for the T-representation.
pub const DEFAULT_POOL_FACTOR: usize = 20;

/// Source of latent d-vectors.
pub trait LatentSampler {
    fn dim(&self) -> usize;
    fn sample_into(&self, rng: &mut SimRng, out: &mut [f64]);
}

/// Parametric latent laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Latent {
    /// Multivariate normal; `chol` is the lower Cholesky factor of the covariance.
    Normal { mean: Vec<f64>, chol: Vec<Vec<f64>> },
    /// Independent Gumbel components, `P(W ≤ w) = exp(−e^{−α w})`.
    Gumbel { alpha: f64, dim: usize },
    /// `W_j = ln G_j` with `G_j ~ Gamma(α_j, 1)`.
    Dirichlet { alphas: Vec<f64> },
    /// Hüsler–Reiss latent: multivariate normal with mean `β` and covariance `Σ`.
    HuslerReiss { mean: Vec<f64>, chol: Vec<Vec<f64>> },
    /// Fixed vector.
    Fixed { value: Vec<f64> },
}

fn cholesky(mean: &[f64], cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = mean.len();
    if d == 0 || cov.len() != d || cov.iter().any(|r| r.len() != d) {
        return Err(Error::Shape(format!("covariance must be {d}×{d}")));
    }
    let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    if (0..d).any(|i| (0..d).any(|j| (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + m[(i, j)].abs()))) {
        return Err(Error::param("covariance must be symmetric"));
    }
    let l = m
        .cholesky()
        .ok_or_else(|| Error::param("covariance must be positive definite"))?
        .l();
    Ok((0..d).map(|i| (0..d).map(|j| l[(i, j)]).collect()).collect())
}

impl Latent {
    pub fn normal(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let chol = cholesky(&mean, &cov)?;
        Ok(Latent::Normal { mean, chol })
    }

    pub fn husler_reiss(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let chol = cholesky(&mean, &cov)?;
        Ok(Latent::HuslerReiss { mean, chol })
    }

    pub fn gumbel(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || dim == 0 {
            return Err(Error::param(format!("Gumbel latent needs alpha > 0 and dim ≥ 1, got {alpha}, {dim}")));
        }
        Ok(Latent::Gumbel { alpha, dim })
    }

    pub fn dirichlet(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::param("Dirichlet latent needs positive shape parameters"));
        }
        Ok(Latent::Dirichlet { alphas })
    }

    /// Whether `E[e^{T_j}]` is finite, as the T-representation requires.
    pub fn has_finite_exponential_moment(&self) -> bool {
        match self {
            Latent::Gumbel { alpha, .. } => *alpha > 1.0,
            _ => true,
        }
    }
}

fn mvn_into(mean: &[f64], chol: &[Vec<f64>], rng: &mut SimRng, out: &mut [f64]) {
    let z: Vec<f64> = (0..mean.len()).map(|_| StandardNormal.sample(rng)).collect();
    for (i, o) in out.iter_mut().enumerate() {
        *o = mean[i] + (0..=i).map(|k| chol[i][k] * z[k]).sum::<f64>();
    }
}

impl LatentSampler for Latent {
    fn dim(&self) -> usize {
        match self {
            Latent::Normal { mean, .. } | Latent::HuslerReiss { mean, .. } => mean.len(),
            Latent::Gumbel { dim, .. } => *dim,
            Latent::Dirichlet { alphas } => alphas.len(),
            Latent::Fixed { value } => value.len(),
        }
    }

    fn sample_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        match self {
            Latent::Normal { mean, chol } | Latent::HuslerReiss { mean, chol } => {
                mvn_into(mean, chol, rng, out)
            }
            Latent::Gumbel { alpha, .. } => {
                for o in out.iter_mut() {
                    let e: f64 = rng.sample(Exp1);
                    *o = -e.ln() / alpha;
                }
            }
            Latent::Dirichlet { alphas } => {
                for (o, &a) in out.iter_mut().zip(alphas) {
                    let g = Gamma::new(a, 1.0).expect("validated shape");
                    let mut v: f64 = g.sample(rng);
                    // Gamma draws with tiny shapes can underflow to zero
                    if v <= 0.0 {
                        v = f64::MIN_POSITIVE;
                    }
                    *o = v.ln();
                }
            }
            Latent::Fixed { value } => out.copy_from_slice(value),
        }
    }
}

/// Standard Pareto draws together with the exponential variable of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct MgpSample {
    pub x: StandardParetoMatrix,
    /// `E` per row; equals the row maximum of `x` exactly.
    pub radial: Vec<f64>,
}

/// Rows `E_i + (U_i − max U_i)`. The row maximum is exactly `E_i`.
pub fn standard_pareto_from_latent(latent: &Array2<f64>, radial: &[f64]) -> Result<StandardParetoMatrix> {
    if latent.nrows() != radial.len() {
        return Err(Error::Shape(format!(
            "{} latent rows for {} exponential draws",
            latent.nrows(),
            radial.len()
        )));
    }
    if let Some(e) = radial.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::param(format!("exponential draws must be positive, got {e}")));
    }
    let mut x = latent.clone();
    for (mut row, &e) in x.outer_iter_mut().zip(radial) {
        let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|u| e + (u - top));
    }
    StandardParetoMatrix::from_array(x)
}

fn exp_draws(rng: &mut SimRng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| loop {
            let e: f64 = rng.sample(Exp1);
            if e > 0.0 {
                break e;
            }
        })
        .collect()
}

/// U-representation: `n` latent draws, then one exponential per row.
pub fn sample_standard_pareto_u<L: LatentSampler + ?Sized>(latent: &L, n: usize, seed: u64) -> Result<MgpSample> {
    let d = latent.dim();
    if d == 0 {
        return Err(Error::param("latent dimension must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let mut u = Array2::zeros((n, d));
    for mut row in u.outer_iter_mut() {
        latent.sample_into(&mut rng, row.as_slice_mut().expect("standard layout"));
    }
    let radial = exp_draws(&mut rng, n);
    Ok(MgpSample {
        x: standard_pareto_from_latent(&u, &radial)?,
        radial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    URep,
    TRep,
}

/// Multivariate generalized Pareto construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgpSpec {
    pub representation: Representation,
    pub latent: Latent,
    pub pool_factor: usize,
}

impl MgpSpec {
    pub fn u_rep(latent: Latent) -> Self {
        Self {
            representation: Representation::URep,
            latent,
            pool_factor: DEFAULT_POOL_FACTOR,
        }
    }

    pub fn t_rep(latent: Latent) -> Self {
        Self {
            representation: Representation::TRep,
            latent,
            pool_factor: DEFAULT_POOL_FACTOR,
        }
    }
}

/// T-representation by importance resampling with weights `e^{max t}`.
/// Fails when the pool's effective sample size drops below `n / 10`.
pub fn sample_standard_pareto_t(spec: &MgpSpec, n: usize, seed: u64) -> Result<MgpSample> {
    if !spec.latent.has_finite_exponential_moment() {
        return Err(Error::param(
            "T-representation needs E[exp(T_j)] < ∞ (Gumbel latent requires alpha > 1)",
        ));
    }
    if spec.pool_factor == 0 {
        return Err(Error::param("pool_factor must be positive"));
    }
    let d = spec.latent.dim();
    let pool_size = spec.pool_factor * n.max(1);
    let mut rng = seeded_rng(seed);
    let mut pool = Array2::zeros((pool_size, d));
    for mut row in pool.outer_iter_mut() {
        spec.latent
            .sample_into(&mut rng, row.as_slice_mut().expect("standard layout"));
    }
    let maxima: Vec<f64> = pool
        .outer_iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let top = maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = maxima.iter().map(|m| (m - top).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let ess = sum * sum / weights.iter().map(|w| w * w).sum::<f64>();
    let required = n as f64 / 10.0;
    if ess < required {
        return Err(Error::HeavyWeights { ess, required });
    }
    let mut cumulative = Vec::with_capacity(pool_size);
    let mut acc = 0.0;
    for w in &weights {
        acc += w / sum;
        cumulative.push(acc);
    }
    let picks: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            cumulative.partition_point(|&c| c < u).min(pool_size - 1)
        })
        .collect();
    let latent = pool.select(ndarray::Axis(0), &picks);
    let radial = exp_draws(&mut rng, n);
    Ok(MgpSample {
        x: standard_pareto_from_latent(&latent, &radial)?,
        radial,
    })
}

/// Dispatch on the representation.
pub fn sample_mgp(spec: &MgpSpec, n: usize, seed: u64) -> Result<MgpSample> {
    match spec.representation {
        Representation::URep => sample_standard_pareto_u(&spec.latent, n, seed),
        Representation::TRep => sample_standard_pareto_t(spec, n, seed),
    }
}
