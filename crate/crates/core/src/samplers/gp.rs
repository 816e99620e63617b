use rand::Rng;
use rand_distr::Open01;

use super::seeded_rng;
use crate::error::{Error, Result};

/// Inverse-CDF draws from the generalized Pareto distribution,
/// `σ (u^{−ξ} − 1) / ξ`, with the exponential limit `−σ ln u` at `ξ = 0`.
pub fn sample_gp_univariate(sigma: f64, xi: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("GP scale must be positive, got {sigma}")));
    }
    if !xi.is_finite() {
        return Err(Error::param("GP shape must be finite"));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            let log_u = u.ln();
            if xi == 0.0 {
                -sigma * log_u
            } else {
                sigma * (-xi * log_u).exp_m1() / xi
            }
        })
        .collect())
}
