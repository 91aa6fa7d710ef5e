//! Approximate word matches between two random DNA sequences.
//!
//! `D₂⁽ᵏ⁾` counts the pairs of positions `(i, j)` at which the `m`-letter words
//! of two sequences differ in at most `k` letters. This crate provides
//!
//! - exact and fast counters for `D₂⁽ᵏ⁾` ([`counting`]),
//! - the perturbed binomial law of a word-to-text Hamming distance under the
//!   strand-symmetric Bernoulli model ([`perturbed`]),
//! - the exact mean, covariance pieces and variance bounds of `D₂⁽ᵏ⁾`, plus
//!   regime diagnostics ([`moments`]),
//! - reproducible Monte Carlo sampling and Kolmogorov–Smirnov normality
//!   testing over `(n, m)` grids ([`simulation`]).

pub mod counting;
pub mod error;
pub mod model;
pub mod moments;
pub mod numeric;
pub mod perturbed;
pub mod simulation;

pub use counting::{
    classify_pair, count_crabgrass_pairs, d2k_fast, d2k_naive, distance_histogram,
    y_indicator, PairClass, PairTag,
};
pub use error::{Error, Result};
pub use model::{hamming, LetterDistribution, MatchParams, PackedWord, Sequence};
pub use moments::{MomentReport, RegimeVerdict, VarLowerBound};
pub use perturbed::{binomial_pmf, g, h, DistanceDistribution, G};
pub use simulation::{KsGrid, KsResult, SimConfig, Standardization};
