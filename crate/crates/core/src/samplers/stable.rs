use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Exp1, Open01};

/// Positive α-stable draw with Laplace transform `exp(−t^α)`, `0 < α ≤ 1`,
/// by the Chambers–Mallows–Stuck (Kanter) construction. `α = 1` is the
/// point mass at one.
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * rng.sample::<f64, _>(Open01);
    let w: f64 = rng.sample(Exp1);
    if alpha >= 1.0 {
        return 1.0;
    }
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::seeded_rng;

    #[test]
    fn laplace_transform_matches() {
        // E[exp(−tS)] = exp(−t^α), checked by Monte Carlo at a few t
        let alpha = 0.5;
        let mut rng = seeded_rng(11);
        let draws: Vec<f64> = (0..200_000).map(|_| positive_stable(alpha, &mut rng)).collect();
        for t in [0.25, 1.0, 3.0] {
            let mc = draws.iter().map(|s| (-t * s).exp()).sum::<f64>() / draws.len() as f64;
            let exact = (-f64::powf(t, alpha)).exp();
            assert!((mc - exact).abs() < 0.005, "t={t}: {mc} vs {exact}");
        }
    }

    #[test]
    fn unit_alpha_is_degenerate() {
        let mut rng = seeded_rng(1);
        assert_eq!(positive_stable(1.0, &mut rng), 1.0);
    }
}
