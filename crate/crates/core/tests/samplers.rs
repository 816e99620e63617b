use extremal_causality::margins::{to_standard_pareto, ThresholdSpec, TransformMethod};
use extremal_causality::samplers::{
    sample_asym_logistic, sample_gp_univariate, sample_mgp, sample_sem, seeded_rng, CopulaSpec, Latent, LatentSampler,
    MgpSpec, Noise, SemKind, SemSpec,
};
use extremal_causality::stats::{exp_cdf, ks_statistic, mean, quantile};

fn ln_gamma_2_density(w: f64) -> f64 {
    // W = ln G, G ~ Gamma(2, 1): f(w) = e^{2w} exp(−e^w) / Γ(2)
    (2.0 * w - w.exp()).exp()
}

/// Normal approximation to the two-sided binomial sign test p-value.
fn sign_test_p(positive: usize, n: usize) -> f64 {
    let z = (positive as f64 - n as f64 / 2.0).abs() / (n as f64 / 4.0).sqrt();
    erfc(z / std::f64::consts::SQRT_2)
}

// Abramowitz and Stegun 7.1.26, absolute error below 1.5e-7.
fn erfc(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t * (0.254_829_592 + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    poly * (-x * x).exp()
}

fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let p = (a[i] - a[j]) * (b[i] - b[j]);
            s += (p > 0.0) as i64 - (p < 0.0) as i64;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

#[test]
fn lscm_without_edge_is_uncorrelated() {
    let data = sample_sem(&SemSpec::bivariate(SemKind::Lscm, 0.0, 0.1), 10_000, 1).unwrap();
    let (a, b) = (data.column(0).to_vec(), data.column(1).to_vec());
    let (ma, mb) = (mean(&a), mean(&b));
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    assert!((cov / (va * vb).sqrt()).abs() < 0.05);
}

#[test]
fn max_linear_with_constant_noise() {
    let spec = SemSpec::new(SemKind::Rmlm, 2, Noise::Constant(1.0)).edge(0, 1, 2.0);
    let data = sample_sem(&spec, 3, 0).unwrap();
    for row in data.values().outer_iter() {
        assert_eq!(row.to_vec(), vec![1.0, 2.0]);
    }
}

#[test]
fn sem_innovations_are_generalized_pareto() {
    // a single node is its own innovation
    let spec = SemSpec::new(SemKind::Lscm, 1, Noise::Pareto { xi: 0.5 });
    let eps = sample_sem(&spec, 100_000, 2).unwrap().column(0).to_vec();
    let p = eps.iter().filter(|&&e| e > 1.0).count() as f64 / 1e5;
    let want: f64 = 1.5f64.powf(-2.0);
    assert!((p - want).abs() < 3.0 * (want * (1.0 - want) / 1e5).sqrt(), "{p}");
    assert!(eps.iter().all(|&e| e >= 0.0));
}

#[test]
fn sem_tail_dependence() {
    let data = sample_sem(&SemSpec::bivariate(SemKind::Lscm, 1.2, 0.1), 100_000, 3).unwrap();
    let (a, b) = (data.column(0).to_vec(), data.column(1).to_vec());
    let (qa, qb) = (quantile(&a, 0.99), quantile(&b, 0.99));
    let joint = a.iter().zip(&b).filter(|(x, y)| **x > qa && **y > qb).count() as f64 / 1e5;
    let baseline: f64 = 0.01 * 0.01;
    assert!(joint > baseline + 3.0 * (baseline / 1e5).sqrt(), "{joint}");
}

#[test]
fn independence_copula_has_no_concordance() {
    let u = sample_asym_logistic(&CopulaSpec::symmetric(1.0), 10_000, 4).unwrap();
    let tau = kendall_tau(&u.column(0).to_vec(), &u.column(1).to_vec());
    assert!(tau.abs() < 0.03, "{tau}");
}

#[test]
fn logistic_copula_concordance() {
    // the logistic extreme-value copula has τ = 1 − α
    let u = sample_asym_logistic(&CopulaSpec::symmetric(0.5), 5_000, 5).unwrap();
    let tau = kendall_tau(&u.column(0).to_vec(), &u.column(1).to_vec());
    assert!((tau - 0.5).abs() < 0.03, "{tau}");
}

#[test]
fn symmetric_copula_is_exchangeable() {
    // symmetry test on a 4 × 4 grid: Σ (n_ij − n_ji)² / (n_ij + n_ji) ~ χ²(6)
    let u = sample_asym_logistic(&CopulaSpec::symmetric(0.3), 50_000, 6).unwrap();
    let mut counts = [[0f64; 4]; 4];
    for r in u.values().outer_iter() {
        let cell = |v: f64| ((v * 4.0) as usize).min(3);
        counts[cell(r[0])][cell(r[1])] += 1.0;
    }
    let mut stat = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let (a, b) = (counts[i][j], counts[j][i]);
            if a + b > 0.0 {
                stat += (a - b).powi(2) / (a + b);
            }
        }
    }
    // χ²(6) upper 1% point
    assert!(stat < 16.81, "{stat}");
}

#[test]
fn asymmetric_copula_is_not_exchangeable() {
    let u = sample_asym_logistic(&CopulaSpec { alpha: 0.3, beta1: 0.8, beta2: 0.2 }, 50_000, 7).unwrap();
    let above = u.values().outer_iter().filter(|r| r[0] > r[1]).count();
    assert!(sign_test_p(above, 50_000) < 0.01);
}

#[test]
fn zero_latent_gives_identical_columns() {
    let s = sample_mgp(&MgpSpec::u_rep(Latent::Fixed { value: vec![0.0; 3] }), 1_000, 8).unwrap();
    for (row, e) in s.x.values().outer_iter().zip(&s.radial) {
        assert!(row.iter().all(|v| v == e));
    }
}

#[test]
fn dirichlet_latent_density() {
    let latent = Latent::dirichlet(vec![2.0]).unwrap();
    let mut rng = seeded_rng(9);
    let n = 100_000;
    let mut w = vec![0.0];
    let (lo, hi, bins) = (-4.0, 3.0, 70);
    let width = (hi - lo) / bins as f64;
    let mut hist = vec![0usize; bins];
    for _ in 0..n {
        latent.sample_into(&mut rng, &mut w);
        if w[0] >= lo && w[0] < hi {
            hist[((w[0] - lo) / width) as usize] += 1;
        }
    }
    let worst = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let mid = lo + (k as f64 + 0.5) * width;
            (c as f64 / (n as f64 * width) - ln_gamma_2_density(mid)).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "{worst}");
}

#[test]
fn exchangeable_latent_gives_symmetric_differences() {
    let cov = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let spec = MgpSpec::t_rep(Latent::husler_reiss(vec![0.0, 0.0], cov).unwrap());
    let x = sample_mgp(&spec, 100_000, 10).unwrap().x;
    let v: Vec<f64> = x.values().outer_iter().map(|r| r[0] - r[1]).collect();
    let pos = v.iter().filter(|&&d| d > 0.0).count();
    let nonzero = v.iter().filter(|&&d| d != 0.0).count();
    assert!(sign_test_p(pos, nonzero) > 0.01);
}

#[test]
fn causal_sem_gives_negative_differences() {
    // the cause sits further below the row maximum: V = X1 − X2 carries more negative mass
    let data = sample_sem(&SemSpec::bivariate(SemKind::Lscm, 1.2, 0.1), 100_000, 11).unwrap();
    let x = to_standard_pareto(&data, &ThresholdSpec::quantile(0.95), TransformMethod::Rank).unwrap().events;
    let v: Vec<f64> = x.values().outer_iter().map(|r| r[0] - r[1]).collect();
    let m = mean(&v);
    let sd = (v.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
    let z = m / (sd / (v.len() as f64).sqrt());
    // one-sided 1% point
    assert!(z < -2.326, "{z}");
}

#[test]
fn conditional_margins_are_exponential() {
    let cov = vec![vec![1.0, 0.2], vec![0.2, 0.5]];
    let configs = [
        MgpSpec::u_rep(Latent::normal(vec![0.0, 0.5], cov.clone()).unwrap()),
        MgpSpec::u_rep(Latent::gumbel(2.0, 2).unwrap()),
        MgpSpec::t_rep(Latent::dirichlet(vec![1.0, 3.0]).unwrap()),
        MgpSpec::t_rep(Latent::husler_reiss(vec![0.0, 0.5], cov).unwrap()),
    ];
    for (k, spec) in configs.iter().enumerate() {
        let x = sample_mgp(spec, 100_000, 40 + k as u64).unwrap().x;
        for j in 0..2 {
            let pos: Vec<f64> = x.column(j).iter().copied().filter(|&v| v > 0.0).collect();
            let crit = 1.63 / (pos.len() as f64).sqrt();
            let ks = ks_statistic(&pos, exp_cdf);
            assert!(ks < crit, "config {k}, margin {j}: {ks} ≥ {crit}");
        }
    }
}

#[test]
fn gp_univariate_laws() {
    let e = sample_gp_univariate(1.0, 0.0, 100_000, 12).unwrap();
    assert!(ks_statistic(&e, exp_cdf) < 0.01);
    let z = sample_gp_univariate(1.0, 0.5, 100_000, 13).unwrap();
    let p = z.iter().filter(|&&v| v > 1.0).count() as f64 / 1e5;
    let want: f64 = 1.5f64.powf(-2.0);
    assert!((p - want).abs() < 3.0 * (want * (1.0 - want) / 1e5).sqrt(), "{p}");
}

#[test]
fn samplers_are_deterministic() {
    let sem = SemSpec::confounder(1.0, 0.1, Some(0.7));
    assert_eq!(sample_sem(&sem, 500, 1).unwrap(), sample_sem(&sem, 500, 1).unwrap());
    assert_ne!(sample_sem(&sem, 500, 1).unwrap(), sample_sem(&sem, 500, 2).unwrap());
    let cop = CopulaSpec { alpha: 0.4, beta1: 0.9, beta2: 0.3 };
    assert_eq!(sample_asym_logistic(&cop, 500, 1).unwrap(), sample_asym_logistic(&cop, 500, 1).unwrap());
    let mgp = MgpSpec::t_rep(Latent::gumbel(2.0, 3).unwrap());
    assert_eq!(sample_mgp(&mgp, 500, 1).unwrap(), sample_mgp(&mgp, 500, 1).unwrap());
    assert_eq!(sample_gp_univariate(1.0, 0.2, 500, 1).unwrap(), sample_gp_univariate(1.0, 0.2, 500, 1).unwrap());
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(sample_sem(&SemSpec::bivariate(SemKind::Rmlm, 0.0, 0.1), 10, 0).is_err());
    assert!(sample_sem(&SemSpec::bivariate(SemKind::Lscm, 1.0, -0.1), 10, 0).is_err());
    assert!(sample_asym_logistic(&CopulaSpec::symmetric(1.5), 10, 0).is_err());
    assert!(Latent::gumbel(0.0, 2).is_err());
    assert!(Latent::dirichlet(vec![0.0, 1.0]).is_err());
    assert!(Latent::normal(vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    assert!(sample_gp_univariate(0.0, 0.1, 10, 0).is_err());
}
