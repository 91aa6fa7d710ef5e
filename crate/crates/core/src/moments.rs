//! Mean, covariance structure and variance bounds of `D₂⁽ᵏ⁾`, and the
//! normality-regime diagnostics built on them.
//!
//! Every sum over `m`-words is grouped by GC-count: under strand symmetry all
//! the quantities involved depend on a word only through its GC-count, and a
//! random `m`-word has GC-count `c` with probability
//! `C(m, c) ((1−η)/2)^c ((1+η)/2)^(m−c)`.
//!
//! The bracketing bounds are stated for `η > 0`; for negative `η` they are
//! evaluated at `|η|`, which the AT↔GC relabelling symmetry makes valid.
//! Exact quantities always use the signed `η`.

use serde::{Deserialize, Serialize};

use crate::counting::count_crabgrass_pairs;
use crate::error::{Error, Result};
use crate::model::{LetterDistribution, MatchParams};
use crate::numeric::{choose, compensated_sum};
use crate::perturbed::{at_mismatch_ratio, cdf_extended, g, gc_count_pmf_unchecked, gc_mismatch_ratio};

fn check_k(m: usize, k: usize) -> Result<()> {
    if k > m {
        return Err(Error::InvalidParams(format!("k = {k} exceeds m = {m}")));
    }
    Ok(())
}

/// `Σ_{r≤k} C(m, r) ratio^r`.
fn neighborhood_weight(m: usize, k: usize, ratio: f64) -> f64 {
    compensated_sum((0..=k).map(|r| choose(m as i64, r as i64) * ratio.powi(r as i32)))
}

/// `E[Y_ij⁽ᵏ⁾]`, the probability that two random `m`-words are within `k`
/// mismatches. Requires a strand-symmetric distribution.
pub fn ey_exact(dist: &LetterDistribution, m: usize, k: usize) -> Result<f64> {
    let eta = dist.require_eta()?;
    check_k(m, k)?;
    if k == m {
        return Ok(1.0);
    }
    Ok(compensated_sum(
        (0..=m).map(|c| gc_count_pmf_unchecked(m, eta, c) * cdf_extended(k as i64, m, eta, c)),
    ))
}

/// `E[Y_ij⁽ᵏ⁾]` for any distribution where it is available: the grouped sum
/// under strand symmetry, otherwise `p₂^m` for exact matches.
pub fn ey_any(dist: &LetterDistribution, m: usize, k: usize) -> Result<f64> {
    match dist.eta() {
        Some(_) => ey_exact(dist, m, k),
        None if k == 0 => Ok(dist.p2().powi(m as i32)),
        None => Err(Error::NotStrandSymmetric),
    }
}

/// `E[D₂⁽ᵏ⁾] = n̄² E[Y]`.
pub fn mean_exact(dist: &LetterDistribution, params: &MatchParams) -> Result<f64> {
    Ok(params.pair_count() as f64 * ey_exact(dist, params.m, params.k)?)
}

/// [`mean_exact`], extended to general letter frequencies when `k = 0`.
pub fn mean_any(dist: &LetterDistribution, params: &MatchParams) -> Result<f64> {
    Ok(params.pair_count() as f64 * ey_any(dist, params.m, params.k)?)
}

/// Bracket on `E[Y]`: `p₂^m Σ_{r≤k} C(m,r) ρ^r` with `ρ = (3∓|η|)/(1±|η|)`.
pub fn ey_bounds(dist: &LetterDistribution, m: usize, k: usize) -> Result<(f64, f64)> {
    let eta = dist.require_eta()?.abs();
    check_k(m, k)?;
    let base = dist.p2().powi(m as i32);
    Ok((
        base * neighborhood_weight(m, k, at_mismatch_ratio(eta)),
        base * neighborhood_weight(m, k, gc_mismatch_ratio(eta)),
    ))
}

/// Bracket on `E[D₂⁽ᵏ⁾]`, `n̄²` times [`ey_bounds`].
pub fn mean_bounds(dist: &LetterDistribution, params: &MatchParams) -> Result<(f64, f64)> {
    let (lo, hi) = ey_bounds(dist, params.m, params.k)?;
    let pairs = params.pair_count() as f64;
    Ok((pairs * lo, pairs * hi))
}

fn mismatch_law(eta: f64, t: usize) -> Vec<f64> {
    if t == 0 {
        return vec![1.0];
    }
    (0..=t)
        .map(|l| {
            compensated_sum((0..=t).map(|c| {
                // g cannot fail here: eta was validated with the distribution
                gc_count_pmf_unchecked(t, eta, c) * g(l, t, eta, c).unwrap_or(0.0)
            }))
        })
        .collect()
}

/// Law of the Hamming distance `Δ(t)` between two independent random
/// `t`-words, as `[Pr(Δ(t) = 0), …, Pr(Δ(t) = t)]`.
pub fn mismatch_distribution(dist: &LetterDistribution, t: usize) -> Result<Vec<f64>> {
    Ok(mismatch_law(dist.require_eta()?, t))
}

/// `f_t(w)` at every GC-count of an `(m−t)`-word `w`:
/// `f_t(w) = Σ_l Pr(Δ(t) = l) G_{k−l}(m−t, η, c_w)`.
fn f_t_profile(eta: f64, m: usize, k: usize, t: usize) -> Vec<f64> {
    let law = mismatch_law(eta, t);
    let rest = m - t;
    (0..=rest)
        .map(|c| {
            compensated_sum(
                law.iter()
                    .enumerate()
                    .map(|(l, p)| p * cdf_extended(k as i64 - l as i64, rest, eta, c)),
            )
        })
        .collect()
}

fn check_overlap(m: usize, k: usize, t: usize) -> Result<()> {
    check_k(m, k)?;
    if t >= m {
        return Err(Error::OutOfRange(format!("overlap t = {t} must be below m = {m}")));
    }
    Ok(())
}

/// `f_t` at an `(m−t)`-word of GC-count `c`: the probability that both
/// crabgrass-related indicators fire given the shared word, for one of them.
pub fn f_t_value(dist: &LetterDistribution, m: usize, k: usize, t: usize, c: usize) -> Result<f64> {
    let eta = dist.require_eta()?;
    check_overlap(m, k, t)?;
    if c > m - t {
        return Err(Error::OutOfRange(format!("GC-count c = {c} exceeds m - t = {}", m - t)));
    }
    Ok(f_t_profile(eta, m, k, t)[c])
}

/// Exact covariance of two crabgrass-related indicators whose words overlap in
/// one sequence with offset `t`: `Var(f_t(W))` for a random `(m−t)`-word `W`.
pub fn crabgrass_cov(dist: &LetterDistribution, m: usize, k: usize, t: usize) -> Result<f64> {
    let eta = dist.require_eta()?;
    check_overlap(m, k, t)?;
    let rest = m - t;
    let f = f_t_profile(eta, m, k, t);
    let weights: Vec<f64> = (0..=rest).map(|c| gc_count_pmf_unchecked(rest, eta, c)).collect();
    let mean = compensated_sum(weights.iter().zip(&f).map(|(w, v)| w * v));
    Ok(compensated_sum(
        weights.iter().zip(&f).map(|(w, v)| w * (v - mean) * (v - mean)),
    ))
}

/// Uniform bound on `|Cov(Y_u, Y_v)|` over all pairs, via `Var(Y) ≤ E[Y]` and
/// the upper estimate of `E[Y]`.
pub fn accordion_cov_bound(dist: &LetterDistribution, m: usize, k: usize) -> Result<f64> {
    Ok(ey_bounds(dist, m, k)?.1)
}

/// The dominant (crabgrass edge) term of the variance lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarLowerBound {
    pub value: f64,
    /// `n̄ ≥ 2(2m − 1)`: crabgrass pairs outnumber accordion pairs so the
    /// dropped remainder is of lower order.
    pub valid: bool,
}

/// `2 n̄² (2n̄ − 4m + 2) [C(m−1, k) ((3−|η|)/(1+|η|))^k]² p₂^{2m} (p₃/p₂² − 1)`,
/// the sum over edge crabgrass pairs of the per-pair covariance lower bound.
/// The leading 2 becomes 1 when `m = 1`.
/// Reported as 0 (and invalid) when the pair-count factor is not positive.
pub fn var_lower_dominant(dist: &LetterDistribution, params: &MatchParams) -> Result<VarLowerBound> {
    let eta = dist.require_eta()?.abs();
    let (m, k) = (params.m, params.k);
    let nbar = params.nbar() as f64;
    let edge_factor = 2.0 * nbar - 4.0 * m as f64 + 2.0;
    let valid = params.nbar() >= 2 * (2 * m - 1) && edge_factor > 0.0;
    if edge_factor <= 0.0 || k >= m {
        return Ok(VarLowerBound { value: 0.0, valid });
    }
    let (p2, p3) = (dist.p2(), dist.p3());
    let per_pair_root = choose((m - 1) as i64, k as i64) * at_mismatch_ratio(eta).powi(k as i32);
    let per_pair = per_pair_root * per_pair_root * p2.powi(2 * m as i32) * (p3 / (p2 * p2) - 1.0);
    // an edge offset t = m − 1 > 0 occurs in both orientations; with m = 1 it
    // is the shared position itself and occurs once
    let orientations = if m == 1 { 1.0 } else { 2.0 };
    Ok(VarLowerBound {
        value: (orientations * nbar * nbar * edge_factor * per_pair).max(0.0),
        valid,
    })
}

/// Three-term upper bound on `Var(D₂⁽ᵏ⁾)`: two crabgrass terms plus the
/// accordion term. With `k = 0` it does not involve `η` and is available for
/// general letter frequencies. Requires `n > 2m`. When `n̄ < 2m` the crabgrass
/// terms use exact pair counts, since the interior count turns negative there.
pub fn var_upper(dist: &LetterDistribution, params: &MatchParams) -> Result<f64> {
    let (n, m, k) = (params.n, params.m, params.k);
    if n <= 2 * m {
        return Err(Error::InvalidParams(format!(
            "variance upper bound needs n > 2m, got n = {n}, m = {m}"
        )));
    }
    let ratio = match (dist.eta(), k) {
        (Some(eta), _) => gc_mismatch_ratio(eta.abs()),
        (None, 0) => 1.0,
        (None, _) => return Err(Error::NotStrandSymmetric),
    };
    let (p2, p3) = (dist.p2(), dist.p3());
    let nbar = params.nbar() as f64;
    let mf = m as f64;
    let mi = m as i32;
    let edge_factor = 2.0 * nbar - 4.0 * mf + 2.0;
    let spread = (mf * ratio).powi(2 * k as i32);
    let accordion =
        nbar * nbar * (2.0 * mf - 1.0).powi(2) * p2.powi(mi) * neighborhood_weight(m, k, ratio);
    let crabgrass = if edge_factor > 0.0 {
        let crab = nbar * nbar * edge_factor;
        let q3 = 2.0 * p3 * (1.0 - p3.powi(mi)) / (1.0 - p3) - p3.powi(mi);
        let q2 = p2 * p2;
        let q22 = 2.0 * q2 * (1.0 - q2.powi(mi)) / (1.0 - q2) - q2.powi(mi);
        crab * spread * q3 - crab * q22
    } else {
        // the interior pair count n̄²(2n̄ − 4m + 2) is not positive here, so
        // weight each overlap by its exact pair count instead
        let mut terms = Vec::with_capacity(m);
        for t in 0..m {
            let rest = (m - t) as i32;
            let pairs = count_crabgrass_pairs(n, m, t)? as f64;
            terms.push(pairs * (spread * p3.powi(rest) - p2.powi(2 * rest)));
        }
        compensated_sum(terms)
    };
    Ok(crabgrass + accordion)
}

/// Exact-match variance lower bound valid for any letter frequencies:
/// `n̄²[(2m−1)(2n̄−4m+2) p₂^{2m}(p₃/p₂²−1) + p₂^m((1+p₂−2p₂²)/(1−p₂) − (2m−1)p₂^m)]`.
pub fn var_lower_k0_general(dist: &LetterDistribution, params: &MatchParams) -> Result<f64> {
    if params.k != 0 {
        return Err(Error::InvalidParams(format!(
            "general-alphabet variance bound is for k = 0, got k = {}",
            params.k
        )));
    }
    let (p2, p3) = (dist.p2(), dist.p3());
    if p2 >= 1.0 {
        return Err(Error::InvalidDistribution("distribution is a point mass".into()));
    }
    let nbar = params.nbar() as f64;
    let span = 2.0 * params.m as f64 - 1.0;
    let mi = params.m as i32;
    let crab = span * (2.0 * nbar - 4.0 * params.m as f64 + 2.0) * p2.powi(2 * mi) * (p3 / (p2 * p2) - 1.0);
    let accordion = p2.powi(mi) * ((1.0 + p2 - 2.0 * p2 * p2) / (1.0 - p2) - span * p2.powi(mi));
    Ok(nbar * nbar * (crab + accordion))
}

/// Where `(n, m)` sits relative to the normality thresholds `α = 1/2`
/// (proved) and `α = 2` (observed), with `α = m / log_{1/p₂}(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub alpha: f64,
    pub theorem_normal: bool,
    pub empirically_normal: bool,
    /// `α ≥ 2`; only meaningful for exact matches.
    pub poisson_regime_k0: bool,
    /// `1/p₂`, the base of the logarithm in `α`.
    pub log_base: f64,
}

fn log_base_of(dist: &LetterDistribution) -> Result<f64> {
    let p2 = dist.p2();
    if p2 >= 1.0 {
        return Err(Error::InvalidDistribution("p2 = 1; regime undefined".into()));
    }
    Ok(1.0 / p2)
}

pub fn regime_classify(dist: &LetterDistribution, n: usize, m: usize) -> Result<RegimeVerdict> {
    if m == 0 || n <= m {
        return Err(Error::InvalidParams(format!("need n > m >= 1, got n = {n}, m = {m}")));
    }
    let log_base = log_base_of(dist)?;
    let alpha = m as f64 * log_base.ln() / (n as f64).ln();
    Ok(RegimeVerdict {
        alpha,
        theorem_normal: alpha < 0.5,
        empirically_normal: alpha < 2.0,
        poisson_regime_k0: alpha >= 2.0,
        log_base,
    })
}

/// The word length on the line `m = α log_{1/p₂}(n)`.
pub fn iso_line_m(dist: &LetterDistribution, n: usize, alpha: f64) -> Result<f64> {
    Ok(alpha * (n as f64).ln() / log_base_of(dist)?.ln())
}

/// `(N/M)^{1/t} · M · C / σ` with `N = n̄²`, `M = (2m−1)(2n̄−2m+1)`, `C = 1`:
/// the quantity that must vanish for the dependency-graph central limit theorem.
pub fn janson_diagnostic(params: &MatchParams, sigma: f64, t: u32) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 || sigma.is_infinite() {
        return Err(Error::OutOfRange(format!("sigma must be positive, got {sigma}")));
    }
    if t == 0 {
        return Err(Error::OutOfRange("t must be at least 1".into()));
    }
    let nbar = params.nbar() as f64;
    let mf = params.m as f64;
    let big_n = nbar * nbar;
    let big_m = ((2.0 * mf - 1.0) * (2.0 * nbar - 2.0 * mf + 1.0)).max(1.0);
    Ok((big_n / big_m).powf(1.0 / f64::from(t)) * big_m / sigma)
}

/// Everything known in closed form about `D₂⁽ᵏ⁾` for one `(distribution, n, m, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub params: MatchParams,
    pub dist: LetterDistribution,
    pub eta: Option<f64>,
    pub p2: f64,
    pub p3: f64,
    pub ey_exact: f64,
    pub ey_lower: f64,
    pub ey_upper: f64,
    pub mean_exact: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub var_lower_dominant: f64,
    pub var_lower_valid: bool,
    pub var_lower_k0_general: Option<f64>,
    pub var_upper: Option<f64>,
    pub regime: RegimeVerdict,
    pub iso_m_alpha_half: f64,
    pub iso_m_alpha_two: f64,
}

impl MomentReport {
    /// Strand-symmetric distributions support every `k`; general frequencies
    /// only `k = 0`.
    pub fn compute(dist: &LetterDistribution, params: &MatchParams) -> Result<Self> {
        let (m, k, n) = (params.m, params.k, params.n);
        let pairs = params.pair_count() as f64;
        let ey = ey_any(dist, m, k)?;
        let (ey_lower, ey_upper) = match dist.eta() {
            Some(_) => ey_bounds(dist, m, k)?,
            None => (ey, ey),
        };
        let lower = match dist.eta() {
            Some(_) => var_lower_dominant(dist, params)?,
            None => VarLowerBound {
                value: 0.0,
                valid: false,
            },
        };
        let var_lower_k0_general = if k == 0 && dist.p2() < 1.0 {
            Some(var_lower_k0_general(dist, params)?)
        } else {
            None
        };
        Ok(Self {
            params: *params,
            dist: *dist,
            eta: dist.eta(),
            p2: dist.p2(),
            p3: dist.p3(),
            ey_exact: ey,
            ey_lower,
            ey_upper,
            mean_exact: pairs * ey,
            mean_lower: pairs * ey_lower,
            mean_upper: pairs * ey_upper,
            var_lower_dominant: lower.value,
            var_lower_valid: lower.valid,
            var_lower_k0_general,
            var_upper: var_upper(dist, params).ok(),
            regime: regime_classify(dist, n, m)?,
            iso_m_alpha_half: iso_line_m(dist, n, 0.5)?,
            iso_m_alpha_two: iso_line_m(dist, n, 2.0)?,
        })
    }
}
