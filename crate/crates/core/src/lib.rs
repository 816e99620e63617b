//! Causal discovery at extreme levels.
//!
//! Extreme events of a random vector (rows where at least one component
//! exceeds a high threshold) are mapped to the standard Pareto scale, where
//! they can be written `X = E + U − max(U)` with `E` unit exponential. The
//! 1-Wasserstein distance of each margin to `E` then orders the components
//! causally: a margin whose extremes drag the others along sits further from
//! `E` than the margins it drives.
//!
//! The crate is organized as the analysis runs:
//!
//! - [`margins`]: threshold selection, generalized Pareto fits and the
//!   standard Pareto transform.
//! - [`score`]: exact Wasserstein distances, pairwise causal scores and the
//!   source node.
//! - [`inference`]: bootstrap intervals and source-node votes.
//! - [`samplers`]: structural equation models, extreme-value copulas and
//!   multivariate generalized Pareto generators.
//!
//! ```
//! use extremal_causality::margins::{to_standard_pareto, ThresholdSpec, TransformMethod};
//! use extremal_causality::samplers::{sample_sem, SemKind, SemSpec};
//! use extremal_causality::score::causal_score;
//!
//! // Y2 = 1.2·Y1 + ε2 with Pareto innovations
//! let data = sample_sem(&SemSpec::bivariate(SemKind::Lscm, 1.2, 0.1), 10_000, 7).unwrap();
//! let x = to_standard_pareto(&data, &ThresholdSpec::quantile(0.95), TransformMethod::Rank)
//!     .unwrap()
//!     .events;
//! assert!(causal_score(&x, 0, 1).unwrap() > 0.0);
//! ```
//!
//! A longer walk-through lives in the guide under `book/`.

pub mod error;
pub mod inference;
pub mod margins;
mod matrix;
mod optim;
pub mod samplers;
pub mod score;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::{SampleMatrix, StandardParetoMatrix};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/standard-pareto.md")]
    mod standard_pareto {}
    #[doc = include_str!("../../../book/src/margins.md")]
    mod margins {}
    #[doc = include_str!("../../../book/src/wasserstein-score.md")]
    mod wasserstein_score {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/bootstrap.md")]
    mod bootstrap {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
