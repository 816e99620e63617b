//! Maximum-likelihood fit of the generalized Pareto distribution to
//! positive threshold exceedances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, SimplexOptions};

/// Shape parameters are searched in this open interval.
pub const XI_BOUNDS: (f64, f64) = (-0.5, 1.0);

/// Fits built on fewer exceedances are not flagged reliable.
pub const MIN_RELIABLE_EXCEEDANCES: usize = 30;

const XI_ZERO: f64 = 1e-10;

/// Fitted generalized Pareto margin with survival `(1 + ξ z / σ)^{−1/ξ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpMarginFit {
    pub sigma: f64,
    pub xi: f64,
    pub threshold: f64,
    pub n_exceed: usize,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub reliable: bool,
}

impl GpMarginFit {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Map an exceedance `z = y − u` to the unit exponential scale,
    /// `ln(1 + ξ z / σ) / ξ`. Arguments at or below `floor` are raised to it.
    pub fn to_exponential_scale(&self, z: f64, floor: f64) -> f64 {
        gp_to_exponential(z, self.sigma, self.xi, floor)
    }
}

pub(crate) fn gp_to_exponential(z: f64, sigma: f64, xi: f64, floor: f64) -> f64 {
    if xi.abs() < XI_ZERO {
        return z / sigma;
    }
    let arg = 1.0 + xi * z / sigma;
    if arg > floor {
        (xi * z / sigma).ln_1p() / xi
    } else {
        floor.ln() / xi
    }
}

/// Negative log-likelihood in `(ln σ, ξ)`; infinite outside the support.
fn nll(z: &[f64], log_sigma: f64, xi: f64) -> f64 {
    if !(xi > XI_BOUNDS.0 && xi < XI_BOUNDS.1) || !log_sigma.is_finite() {
        return f64::INFINITY;
    }
    let n = z.len() as f64;
    let sigma = log_sigma.exp();
    if xi.abs() < XI_ZERO {
        return n * log_sigma + z.iter().sum::<f64>() / sigma;
    }
    let scale = xi / sigma;
    let mut acc = 0.0;
    for &v in z {
        let a = scale * v;
        if a <= -1.0 {
            return f64::INFINITY;
        }
        acc += a.ln_1p();
    }
    n * log_sigma + (1.0 + 1.0 / xi) * acc
}

/// Probability-weighted-moment estimates `(σ, ξ)`, used as the search start.
pub fn pwm_estimate(z: &[f64]) -> (f64, f64) {
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let a0 = sorted.iter().sum::<f64>() / n;
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (1.0 - (i as f64 + 1.0 - 0.35) / n) * v)
        .sum::<f64>()
        / n;
    let denom = a0 - 2.0 * a1;
    let xi = 2.0 - a0 / denom;
    let sigma = 2.0 * a0 * a1 / denom;
    if sigma.is_finite() && sigma > 0.0 && xi.is_finite() {
        (sigma, xi)
    } else {
        (a0, 0.0)
    }
}

/// Fit `(σ, ξ)` by maximum likelihood with `ξ ∈ (−0.5, 1)`, starting from
/// probability-weighted moments.
///
/// ```
/// use extremal_causality::margins::fit_gp_margin;
///
/// let z: Vec<f64> = (1..=200).map(|i| -(1.0 - i as f64 / 201.0_f64).ln()).collect();
/// let fit = fit_gp_margin(&z).unwrap();
/// assert!((fit.sigma - 1.0).abs() < 0.1 && fit.xi.abs() < 0.1);
/// ```
pub fn fit_gp_margin(exceedances: &[f64]) -> Result<GpMarginFit> {
    if exceedances.len() < 2 {
        return Err(Error::InsufficientData {
            what: "exceedances for a generalized Pareto fit",
            needed: 2,
            got: exceedances.len(),
        });
    }
    if let Some(v) = exceedances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::param(format!("exceedances must be positive and finite, got {v}")));
    }
    let z_max = exceedances.iter().copied().fold(0.0, f64::max);
    if exceedances.iter().all(|&v| v == exceedances[0]) {
        return Err(Error::FitFailure {
            reason: "all exceedances identical".into(),
            iterations: 0,
            sigma: f64::NAN,
            xi: f64::NAN,
            nll: f64::NAN,
        });
    }

    let (s0, x0) = pwm_estimate(exceedances);
    let xi0 = x0.clamp(XI_BOUNDS.0 + 0.05, XI_BOUNDS.1 - 0.05);
    // keep the start inside the support when the tail is bounded
    let sigma0 = if xi0 < 0.0 { s0.max(-xi0 * z_max * 1.05) } else { s0 };
    let objective = |p: &[f64]| nll(exceedances, p[0], p[1]);

    let opts = SimplexOptions::default();
    let mut iterations = 0;
    let mut start = vec![sigma0.ln(), xi0];
    let mut best = None;
    // restart from the previous optimum to escape a collapsed simplex
    for _ in 0..3 {
        let m = nelder_mead(&objective, &start, &[0.1, 0.05], opts);
        iterations += m.iterations;
        let done = m.converged
            && best
                .as_ref()
                .is_some_and(|b: &crate::optim::Minimum| (b.value - m.value).abs() <= 1e-9 * (1.0 + m.value.abs()));
        start = m.x.clone();
        best = Some(m);
        if done {
            break;
        }
    }
    let m = best.expect("at least one simplex run");
    let (sigma, xi) = (m.x[0].exp(), m.x[1]);
    if !m.converged || !m.value.is_finite() {
        return Err(Error::FitFailure {
            reason: "simplex search did not converge".into(),
            iterations,
            sigma,
            xi,
            nll: m.value,
        });
    }
    Ok(GpMarginFit {
        sigma,
        xi,
        threshold: 0.0,
        n_exceed: exceedances.len(),
        log_likelihood: -m.value,
        iterations,
        reliable: exceedances.len() >= MIN_RELIABLE_EXCEEDANCES,
    })
}
