//! The perturbed binomial law of the Hamming distance between a random
//! strand-symmetric text and a fixed query word.
//!
//! For a query of length `m` with GC-count `c` and a text whose letters follow
//! `ξ_A = ξ_T = (1+η)/4`, `ξ_C = ξ_G = (1−η)/4`:
//!
//! ```text
//! h(m, η, c)    = 4^−m (1−η)^c (1+η)^(m−c)
//! u_k(m, η, c)  = Σ_i C(c, i) C(m−c, m−k−i) v_k(i, η, c)
//! v_k(i, η, c)  = ((3+η)/(1−η))^(c−i) ((3−η)/(1+η))^(k−c+i)
//! g_k(m, η, c)  = h · u_k
//! ```
//!
//! `i` counts the GC positions of the query that the text matches; binomials
//! outside their support vanish. Evaluation is direct with compensated
//! summation up to [`DIRECT_EVAL_MAX_M`] and in log space above it.

use crate::error::{Error, Result};
use crate::numeric::{choose, compensated_sum, ln_choose, log_sum_exp};

/// Word lengths up to this value are evaluated directly; longer ones in log space.
pub const DIRECT_EVAL_MAX_M: usize = 30;

fn check_eta(eta: f64) -> Result<()> {
    if !eta.is_finite() || eta.abs() >= 1.0 {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok(())
}

fn check_gc(m: usize, c: usize) -> Result<()> {
    if c > m {
        return Err(Error::OutOfRange(format!("GC-count c = {c} exceeds m = {m}")));
    }
    Ok(())
}

fn check_k(m: usize, k: usize) -> Result<()> {
    if k > m {
        return Err(Error::OutOfRange(format!("distance k = {k} exceeds m = {m}")));
    }
    Ok(())
}

/// Mismatch-odds ratio at a GC query letter, `(3+η)/(1−η)`.
pub fn gc_mismatch_ratio(eta: f64) -> f64 {
    (3.0 + eta) / (1.0 - eta)
}

/// Mismatch-odds ratio at an AT query letter, `(3−η)/(1+η)`.
pub fn at_mismatch_ratio(eta: f64) -> f64 {
    (3.0 - eta) / (1.0 + eta)
}

/// Probability of any particular `m`-word with GC-count `c`.
pub fn h(m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    Ok(h_unchecked(m, eta, c))
}

pub fn ln_h(m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    Ok(ln_h_unchecked(m, eta, c))
}

fn h_unchecked(m: usize, eta: f64, c: usize) -> f64 {
    if m > DIRECT_EVAL_MAX_M {
        return ln_h_unchecked(m, eta, c).exp();
    }
    let gc = (1.0 - eta) / 4.0;
    let at = (1.0 + eta) / 4.0;
    gc.powi(c as i32) * at.powi((m - c) as i32)
}

fn ln_h_unchecked(m: usize, eta: f64, c: usize) -> f64 {
    -(m as f64) * 4f64.ln() + c as f64 * (-eta).ln_1p() + (m - c) as f64 * eta.ln_1p()
}

/// Range of `i` (matched GC positions) with non-vanishing binomials.
fn match_range(m: usize, k: usize, c: usize) -> std::ops::RangeInclusive<usize> {
    // C(c, i) needs i ≤ c; C(m−c, m−k−i) needs m−k−i ≤ m−c, i.e. i ≥ c−k.
    let lo = c.saturating_sub(k);
    let hi = c.min(m - k);
    lo..=hi
}

fn u_direct(m: usize, k: usize, eta: f64, c: usize) -> f64 {
    let a = gc_mismatch_ratio(eta);
    let b = at_mismatch_ratio(eta);
    compensated_sum(match_range(m, k, c).map(|i| {
        let gc_miss = c - i;
        let at_miss = k + i - c;
        choose(c as i64, i as i64)
            * choose((m - c) as i64, (m - k - i) as i64)
            * a.powi(gc_miss as i32)
            * b.powi(at_miss as i32)
    }))
}

fn ln_u(m: usize, k: usize, eta: f64, c: usize) -> f64 {
    let ln_a = gc_mismatch_ratio(eta).ln();
    let ln_b = at_mismatch_ratio(eta).ln();
    let terms: Vec<f64> = match_range(m, k, c)
        .map(|i| {
            let gc_miss = (c - i) as f64;
            let at_miss = (k + i - c) as f64;
            ln_choose(c as i64, i as i64)
                + ln_choose((m - c) as i64, (m - k - i) as i64)
                + gc_miss * ln_a
                + at_miss * ln_b
        })
        .collect();
    log_sum_exp(&terms)
}

/// `Pr(δ(T, q) = k)` for a query `q` of GC-count `c`.
pub fn g(k: usize, m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    check_k(m, k)?;
    Ok(g_unchecked(k, m, eta, c))
}

/// `ln g_k(m, η, c)`, evaluated entirely in log space regardless of `m`.
pub fn ln_g(k: usize, m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    check_k(m, k)?;
    Ok(ln_h_unchecked(m, eta, c) + ln_u(m, k, eta, c))
}

/// `g` by direct evaluation, for comparison against [`ln_g`].
pub fn g_direct(k: usize, m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    check_k(m, k)?;
    let gc = (1.0 - eta) / 4.0;
    let at = (1.0 + eta) / 4.0;
    Ok(gc.powi(c as i32) * at.powi((m - c) as i32) * u_direct(m, k, eta, c))
}

fn g_unchecked(k: usize, m: usize, eta: f64, c: usize) -> f64 {
    if m <= DIRECT_EVAL_MAX_M {
        h_unchecked(m, eta, c) * u_direct(m, k, eta, c)
    } else {
        (ln_h_unchecked(m, eta, c) + ln_u(m, k, eta, c)).exp()
    }
}

/// `Pr(δ(T, q) ≤ k)`. Equals 1 exactly at `k = m`.
#[allow(non_snake_case)]
pub fn G(k: usize, m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    check_k(m, k)?;
    Ok(cdf_unchecked(k, m, eta, c))
}

fn cdf_unchecked(k: usize, m: usize, eta: f64, c: usize) -> f64 {
    if k >= m {
        return 1.0;
    }
    let total = if m <= DIRECT_EVAL_MAX_M {
        compensated_sum((0..=k).map(|r| g_unchecked(r, m, eta, c)))
    } else {
        let ln_h = ln_h_unchecked(m, eta, c);
        let terms: Vec<f64> = (0..=k).map(|r| ln_h + ln_u(m, r, eta, c)).collect();
        log_sum_exp(&terms).exp()
    };
    total.min(1.0)
}

/// `G` extended to any integer threshold: 0 below zero, 1 at or above `m`.
pub(crate) fn cdf_extended(threshold: i64, m: usize, eta: f64, c: usize) -> f64 {
    if threshold < 0 {
        0.0
    } else if threshold as usize >= m {
        1.0
    } else {
        cdf_unchecked(threshold as usize, m, eta, c)
    }
}

/// `b_k(m, ρ) = C(m, k) ρ^(m−k) (1−ρ)^k` where `ρ` is the per-letter *match*
/// probability, so `k` counts mismatches.
pub fn binomial_pmf(k: usize, m: usize, rho: f64) -> Result<f64> {
    check_k(m, k)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::OutOfRange(format!("rho = {rho} outside [0, 1]")));
    }
    Ok(choose(m as i64, k as i64) * rho.powi((m - k) as i32) * (1.0 - rho).powi(k as i32))
}

/// Probability that a random `m`-word has GC-count `c`:
/// `C(m, c) 2^m h(m, η, c) = C(m, c) ((1−η)/2)^c ((1+η)/2)^(m−c)`.
pub fn gc_count_pmf(m: usize, eta: f64, c: usize) -> Result<f64> {
    check_eta(eta)?;
    check_gc(m, c)?;
    Ok(gc_count_pmf_unchecked(m, eta, c))
}

pub(crate) fn gc_count_pmf_unchecked(m: usize, eta: f64, c: usize) -> f64 {
    let gc = (1.0 - eta) / 2.0;
    let at = (1.0 + eta) / 2.0;
    if m <= DIRECT_EVAL_MAX_M {
        choose(m as i64, c as i64) * gc.powi(c as i32) * at.powi((m - c) as i32)
    } else {
        (ln_choose(m as i64, c as i64) + c as f64 * gc.ln() + (m - c) as f64 * at.ln()).exp()
    }
}

/// The full distance law for one `(m, η, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution {
    m: usize,
    eta: f64,
    c: usize,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl DistanceDistribution {
    pub fn new(m: usize, eta: f64, c: usize) -> Result<Self> {
        check_eta(eta)?;
        check_gc(m, c)?;
        let pmf: Vec<f64> = (0..=m).map(|k| g_unchecked(k, m, eta, c)).collect();
        let cdf = (0..=m).map(|k| cdf_unchecked(k, m, eta, c)).collect();
        Ok(Self { m, eta, c, pmf, cdf })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gc_count(&self) -> usize {
        self.c
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }
}
