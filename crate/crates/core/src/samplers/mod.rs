//! Synthetic data generators.
//!
//! Every sampler is a deterministic function of its specification, the
//! sample size and a `u64` seed. Generators are never shared: code that
//! needs several independent streams derives them with [`stream_rng`].

mod copula;
mod gp;
mod mgp;
mod sem;
mod stable;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use copula::{asym_logistic_cdf, sample_asym_logistic, CopulaSpec};
pub use gp::sample_gp_univariate;
pub use mgp::{
    sample_mgp, sample_standard_pareto_t, sample_standard_pareto_u, standard_pareto_from_latent,
    Latent, LatentSampler, MgpSample, MgpSpec, Representation, DEFAULT_POOL_FACTOR,
};
pub use sem::{sample_sem, topological_sort, Noise, SemKind, SemSpec};
pub use stable::positive_stable;

/// Generator used by every sampler.
pub type SimRng = ChaCha8Rng;

/// Generator for `seed`.
pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
