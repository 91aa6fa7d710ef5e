//! Monte Carlo sampling of `D₂⁽ᵏ⁾` under the Bernoulli text model and
//! Kolmogorov–Smirnov testing of the standardized statistic against `N(0, 1)`.
//!
//! # Reproducibility
//!
//! Replicate `r` of a run with seed `s` draws its sequence pair from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `r`, first `A` then `B`,
//! one `f64` per letter. Results are therefore independent of thread count
//! and execution order. Grid cells derive their own seed from the grid seed
//! and the cell's `(n, m, k)` with [`cell_seed`]; a cell is reproduced by a
//! single run with that seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::counting::d2k_fast;
use crate::error::{Error, Result};
use crate::model::{LetterDistribution, MatchParams, Sequence};
use crate::moments::{iso_line_m, mean_any, regime_classify};
use crate::numeric::format_g17;

/// Salt mixed into a run seed to obtain the independent pilot-run seed.
const PILOT_SALT: u64 = 0x7069_6c6f_745f_7369; // "pilot_si"

/// How the sample is scaled before the KS comparison. The location is always
/// the exact mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Standardization {
    /// Sample standard deviation of the tested replicates themselves.
    EmpiricalSigma,
    /// Sample standard deviation of an independent pilot run.
    PilotSigma { pilot_replicates: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dist: LetterDistribution,
    pub params: MatchParams,
    pub replicates: usize,
    pub seed: u64,
    pub standardization: Standardization,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::OutOfRange(format!(
                "need at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if let Standardization::PilotSigma { pilot_replicates } = self.standardization {
            if pilot_replicates < 2 {
                return Err(Error::OutOfRange(format!(
                    "need at least 2 pilot replicates, got {pilot_replicates}"
                )));
            }
        }
        if self.dist.eta().is_none() && self.params.k != 0 {
            return Err(Error::NotStrandSymmetric);
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of grid cell `(n, m, k)` under grid seed `seed`.
pub fn cell_seed(seed: u64, n: usize, m: usize, k: usize) -> u64 {
    [n as u64, m as u64, k as u64]
        .into_iter()
        .fold(mix64(seed), |acc, v| mix64(acc ^ v))
}

/// The generator for replicate `replicate` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// `n` i.i.d. letters drawn from `dist`.
pub fn generate_sequence<R: Rng + ?Sized>(dist: &LetterDistribution, n: usize, rng: &mut R) -> Sequence {
    let p = dist.probs();
    let thresholds = [p[0], p[0] + p[1], p[0] + p[1] + p[2]];
    let codes = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            thresholds.iter().filter(|&&t| u >= t).count() as u8
        })
        .collect();
    Sequence::from_codes(codes).expect("codes are in range and n >= 1")
}

fn sample_with_seed(dist: &LetterDistribution, params: &MatchParams, replicates: usize, seed: u64) -> Result<Vec<u64>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let a = generate_sequence(dist, params.n, &mut rng);
            let b = generate_sequence(dist, params.n, &mut rng);
            d2k_fast(&a, &b, params)
        })
        .collect()
}

/// `replicates` independent draws of `D₂⁽ᵏ⁾`, in replicate order.
pub fn sample_d2k(config: &SimConfig) -> Result<Vec<u64>> {
    config.validate()?;
    sample_with_seed(&config.dist, &config.params, config.replicates, config.seed)
}

/// `Φ(x)`, the standard normal distribution function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F_N(x) − F(x)|` for the empirical distribution of `samples`.
/// Tied values are handled as one jump of the empirical CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut start = 0;
    while start < sorted.len() {
        let x = sorted[start];
        let end = start + sorted[start..].iter().take_while(|&&y| y == x).count();
        let f = cdf(x);
        d = d.max(f - start as f64 / n).max(end as f64 / n - f);
        start = end;
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Asymptotic Kolmogorov tail `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`.
///
/// For `λ < 0.5` the equivalent form `1 − (√(2π)/λ) Σ_{j≥1} e^{−(2j−1)²π²/(8λ²)}`
/// is used, since the alternating series needs `O(1/λ)` terms there.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda.is_nan() || lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 0.5 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut sum = 0.0;
        for j in 1.. {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp();
            sum += term;
            if term < 1e-17 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1.. {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += sign * term;
            sign = -sign;
            if term < 1e-12 {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

/// Asymptotic p-value `Q(√N · d)` of a KS statistic `d` from `N` samples.
pub fn kolmogorov_pvalue(d: f64, n_samples: usize) -> f64 {
    kolmogorov_q((n_samples as f64).sqrt() * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
    pub mean_used: f64,
    pub sigma_used: f64,
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = if samples.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// `(x − μ)/σ`. With `σ = 0` the sample is a point mass: values above `μ` map
/// to `+∞`, below to `−∞`, equal to 0.
pub fn standardize(samples: &[f64], mean: f64, sigma: f64) -> Vec<f64> {
    samples
        .iter()
        .map(|&x| {
            if sigma > 0.0 {
                (x - mean) / sigma
            } else if x > mean {
                f64::INFINITY
            } else if x < mean {
                f64::NEG_INFINITY
            } else {
                0.0
            }
        })
        .collect()
}

/// KS test of `(x − mean)/sigma` against the standard normal.
pub fn ks_normal_test(samples: &[f64], mean: f64, sigma: f64) -> Result<KsResult> {
    let z = standardize(samples, mean, sigma);
    let d = ks_statistic(&z, standard_normal_cdf)?;
    Ok(KsResult {
        d_statistic: d,
        p_value: kolmogorov_pvalue(d, samples.len()),
        n_samples: samples.len(),
        mean_used: mean,
        sigma_used: sigma,
    })
}

/// One simulated cell: the raw counts plus their summary and KS result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub config: SimConfig,
    pub mean_exact: f64,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub ks: KsResult,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub samples: Vec<u64>,
}

/// Simulates `config.replicates` values, standardizes them by the exact mean and
/// the configured scale, and KS-tests the result.
pub fn simulate(config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let mean_exact = mean_any(&config.dist, &config.params)?;
    let samples = sample_d2k(config)?;
    let values: Vec<f64> = samples.iter().map(|&v| v as f64).collect();
    let (sample_mean, sample_var) = mean_and_variance(&values);
    let sigma = match config.standardization {
        Standardization::EmpiricalSigma => sample_var.sqrt(),
        Standardization::PilotSigma { pilot_replicates } => {
            let pilot = sample_with_seed(
                &config.dist,
                &config.params,
                pilot_replicates,
                mix64(config.seed ^ PILOT_SALT),
            )?;
            let pilot: Vec<f64> = pilot.iter().map(|&v| v as f64).collect();
            mean_and_variance(&pilot).1.sqrt()
        }
    };
    let ks = ks_normal_test(&values, mean_exact, sigma)?;
    Ok(SimOutcome {
        config: config.clone(),
        mean_exact,
        sample_mean,
        sample_var,
        ks,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub k: usize,
    pub dist: LetterDistribution,
    pub replicates: usize,
    pub seed: u64,
    pub standardization: Standardization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub replicates: usize,
    pub mean_exact: f64,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub ks: KsResult,
}

/// Word lengths of the `α = 1/2` and `α = 2` lines at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoLines {
    pub n: usize,
    pub m_alpha_half: f64,
    pub m_alpha_two: f64,
}

/// KS p-values over an `(n, m)` grid at fixed `k`. `cells[i][j]` belongs to
/// `n_values[i]`, `m_values[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsGrid {
    pub spec: GridSpec,
    pub iso_lines: Vec<IsoLines>,
    pub cells: Vec<Vec<GridCell>>,
}

pub const KS_GRID_CSV_HEADER: &str = "n,m,k,alpha,reps,d_stat,p_value,seed";

impl KsGrid {
    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().flatten()
    }

    pub fn cell(&self, n: usize, m: usize) -> Option<&GridCell> {
        self.iter_cells().find(|c| c.n == n && c.m == m)
    }

    /// One row per cell, `n`-major, `'\n'` line endings, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(KS_GRID_CSV_HEADER);
        out.push('\n');
        for c in self.iter_cells() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.n,
                c.m,
                c.k,
                format_g17(c.alpha),
                c.replicates,
                format_g17(c.ks.d_statistic),
                format_g17(c.ks.p_value),
                c.seed
            ));
        }
        out
    }
}

fn run_cell(spec: &GridSpec, n: usize, m: usize) -> Result<GridCell> {
    let params = MatchParams::new(n, m, spec.k)?;
    let seed = cell_seed(spec.seed, n, m, spec.k);
    let config = SimConfig {
        dist: spec.dist,
        params,
        replicates: spec.replicates,
        seed,
        standardization: spec.standardization,
    };
    let outcome = simulate(&config)?;
    Ok(GridCell {
        n,
        m,
        k: spec.k,
        alpha: regime_classify(&spec.dist, n, m)?.alpha,
        seed,
        replicates: spec.replicates,
        mean_exact: outcome.mean_exact,
        sample_mean: outcome.sample_mean,
        sample_var: outcome.sample_var,
        ks: outcome.ks,
    })
}

pub fn ks_grid(spec: &GridSpec) -> Result<KsGrid> {
    let coords: Vec<(usize, usize)> = spec
        .n_values
        .iter()
        .flat_map(|&n| spec.m_values.iter().map(move |&m| (n, m)))
        .collect();
    let flat: Vec<GridCell> = coords
        .par_iter()
        .map(|&(n, m)| {
            run_cell(spec, n, m).map_err(|e| Error::Cell {
                n,
                m,
                k: spec.k,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let width = spec.m_values.len().max(1);
    let cells = flat.chunks(width).map(<[GridCell]>::to_vec).collect();
    let iso_lines = spec
        .n_values
        .iter()
        .map(|&n| {
            Ok(IsoLines {
                n,
                m_alpha_half: iso_line_m(&spec.dist, n, 0.5)?,
                m_alpha_two: iso_line_m(&spec.dist, n, 2.0)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(KsGrid {
        spec: spec.clone(),
        iso_lines,
        cells,
    })
}
