//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each.
//! Failures are reported, not hidden; set `D2K_ACCEPTANCE_STRICT=1` to make
//! any failure fail the test binary as well.

mod common;

use std::time::Instant;

use d2k::counting::{d2k_fast, d2k_naive, distance_histogram};
use d2k::model::{LetterDistribution, MatchParams, Sequence};
use d2k::moments::{
    crabgrass_cov, ey_exact, mean_bounds, mean_exact, mismatch_distribution, var_lower_dominant, var_upper,
};
use d2k::numeric::choose;
use d2k::perturbed::g;
use d2k::simulation::{
    kolmogorov_pvalue, kolmogorov_q, ks_grid, ks_normal_test, ks_statistic, mean_and_variance, sample_d2k,
    GridSpec, SimConfig, Standardization,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dist(eta: f64) -> LetterDistribution {
    LetterDistribution::strand_symmetric(eta).unwrap()
}

fn exact_mean_oracle() -> Outcome {
    let dists = [dist(0.0), dist(1.0 / 3.0)];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in 1..=2 {
        for n in m + 1..=5 {
            let moments = enumerate_pair_moments(n, m, &dists);
            for (d, per_k) in dists.iter().zip(&moments) {
                for (k, &(mean, _)) in per_k.iter().enumerate() {
                    let params = MatchParams::new(n, m, k).unwrap();
                    let exact = mean_exact(d, &params).unwrap();
                    let err = (exact - mean).abs();
                    worst = worst.max(err);
                    cases += 1;
                    ensure(err <= 1e-10, || {
                        format!("n={n} m={m} k={k} eta={:?}: formula {exact} vs enumeration {mean}", d.eta())
                    })?;
                }
            }
        }
    }
    Ok(format!("{cases} cases, max |error| {worst:.2e}"))
}

fn perturbed_binomial_oracle() -> Outcome {
    let etas = [0.0, 1.0 / 3.0, -1.0 / 3.0, 0.9, -0.9];
    let mut worst = 0.0f64;
    for &eta in &etas {
        let d = dist(eta);
        for m in 1..=6 {
            for c in 0..=m {
                // two queries with the same GC-count but different letters
                let q1: Vec<u8> = (0..m).map(|i| if i < c { 1 } else { 0 }).collect();
                let q2: Vec<u8> = (0..m).map(|i| if i < c { 2 } else { 3 }).rev().collect();
                for q in [q1, q2] {
                    let law = text_distance_law(&q, &d);
                    for (k, &p) in law.iter().enumerate() {
                        let v = g(k, m, eta, c).unwrap();
                        worst = worst.max((v - p).abs());
                        ensure((v - p).abs() <= 1e-12, || {
                            format!("g({k},{m},{eta},{c}) = {v} vs enumeration {p}")
                        })?;
                    }
                }
            }
        }
        for m in 1..=12 {
            for c in 0..=m {
                let total: f64 = (0..=m).map(|k| g(k, m, eta, c).unwrap()).sum();
                ensure((total - 1.0).abs() <= 1e-10, || {
                    format!("sum of g(.,{m},{eta},{c}) = {total}")
                })?;
            }
        }
    }
    Ok(format!("m <= 6 vs all texts, max |error| {worst:.2e}; normalization holds for m <= 12"))
}

fn closed_form_identities() -> Outcome {
    let etas = [0.0, 1.0 / 3.0, -1.0 / 3.0, 0.9, -0.9];
    let mut checks = 0;
    for &eta in &etas {
        let d = dist(eta);
        let (p2, p3) = (d.p2(), d.p3());
        for m in 1..=12usize {
            let ey0 = ey_exact(&d, m, 0).unwrap();
            ensure((ey0 - p2.powi(m as i32)).abs() < 1e-12, || format!("k=0 mean, m={m} eta={eta}"))?;
            checks += 1;
            if eta == 0.0 {
                for k in 0..=m {
                    let uniform: f64 = (0..=k)
                        .map(|r| choose(m as i64, r as i64) * 0.75f64.powi(r as i32) * 0.25f64.powi((m - r) as i32))
                        .sum();
                    let ey = ey_exact(&d, m, k).unwrap();
                    ensure((ey - uniform).abs() < 1e-12, || format!("uniform mean m={m} k={k}: {ey} vs {uniform}"))?;
                    checks += 1;
                }
            }
            for t in 0..m {
                let cov0 = crabgrass_cov(&d, m, 0, t).unwrap();
                let rest = (m - t) as i32;
                let closed = p2.powi(2 * t as i32) * (p3.powi(rest) - p2.powi(2 * rest));
                ensure((cov0 - closed).abs() < 1e-12, || format!("k=0 covariance m={m} t={t} eta={eta}"))?;
                checks += 1;
                for k in 0..=m {
                    let cov = crabgrass_cov(&d, m, k, t).unwrap();
                    if eta == 0.0 {
                        ensure(cov.abs() < 1e-14, || format!("uniform covariance m={m} k={k} t={t}: {cov}"))?;
                        checks += 1;
                    }
                    if t == m - 1 {
                        let law = mismatch_distribution(&d, m - 1).unwrap();
                        let pk = law.get(k).copied().unwrap_or(0.0);
                        let edge = pk * pk * (p3 - p2 * p2);
                        ensure((cov - edge).abs() < 1e-12, || {
                            format!("edge covariance m={m} k={k} eta={eta}: {cov} vs {edge}")
                        })?;
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checks} identities over m <= 12"))
}

/// Normal-approximation 99% interval for a variance, from the sample's fourth
/// central moment.
fn variance_ci(xs: &[f64]) -> (f64, f64, f64) {
    let (mean, var) = mean_and_variance(xs);
    let n = xs.len() as f64;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se = ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).sqrt();
    (var, var - 2.576 * se, var + 2.576 * se)
}

fn bound_ordering() -> Outcome {
    for eta in [0.0, 1.0 / 3.0, -1.0 / 3.0, 0.9, -0.9] {
        let d = dist(eta);
        for m in 1..=12 {
            for k in 0..=m {
                let params = MatchParams::new(100, m, k).unwrap();
                let exact = mean_exact(&d, &params).unwrap();
                let (lo, hi) = mean_bounds(&d, &params).unwrap();
                let slack = 1e-9 * exact.abs();
                ensure(lo <= exact + slack && exact <= hi + slack, || {
                    format!("mean bracket m={m} k={k} eta={eta}: {lo} <= {exact} <= {hi}")
                })?;
            }
        }
    }
    let d = dist(1.0 / 3.0);
    let params = MatchParams::new(400, 4, 1).unwrap();
    let config = SimConfig {
        dist: d,
        params,
        replicates: 10_000,
        seed: 0x5eed_0004,
        standardization: Standardization::EmpiricalSigma,
    };
    let xs: Vec<f64> = sample_d2k(&config).unwrap().into_iter().map(|v| v as f64).collect();
    let (var, ci_lo, ci_hi) = variance_ci(&xs);
    let lower = var_lower_dominant(&d, &params).unwrap();
    let upper = var_upper(&d, &params).unwrap();
    ensure(lower.valid, || "lower bound flagged invalid".into())?;
    ensure(lower.value <= ci_hi, || {
        format!("lower bound {} above 99% CI [{ci_lo:.1}, {ci_hi:.1}]", lower.value)
    })?;
    ensure(upper >= ci_lo, || format!("upper bound {upper} below 99% CI [{ci_lo:.1}, {ci_hi:.1}]"))?;
    Ok(format!(
        "mean brackets hold; (400,4,1,1/3): {:.0} <= Var {var:.0} (99% CI [{ci_lo:.0}, {ci_hi:.0}]) <= {upper:.3e}, upper/Var = {:.1}",
        lower.value,
        upper / var
    ))
}

fn counter_equivalence() -> Outcome {
    let mut pairs = 0u64;
    // every sequence pair over alphabets of 4 (n <= 6), 3 (n = 7) and 2 (n = 8) letters
    for (n, base) in [(2, 4), (3, 4), (4, 4), (5, 4), (6, 4), (7, 3), (8, 2)] {
        let seqs = all_sequences(n, base);
        for m in 1..=3.min(n - 1) {
            let params: Vec<MatchParams> = (0..=m).map(|k| MatchParams::new(n, m, k).unwrap()).collect();
            for a in &seqs {
                for b in &seqs {
                    let hist = naive_histogram(a.codes(), b.codes(), m);
                    let mut cum = 0u64;
                    for (k, p) in params.iter().enumerate() {
                        cum += hist[k];
                        let fast = d2k_fast(a, b, p).unwrap();
                        ensure(fast == cum, || format!("{a} vs {b}, m={m} k={k}: fast {fast}, naive {cum}"))?;
                    }
                    pairs += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let uniform = LetterDistribution::uniform();
    for _ in 0..1000 {
        let n = rng.random_range(2..=64);
        let m = rng.random_range(1..n.min(9));
        let k = rng.random_range(0..=m);
        let a = Sequence::from_codes(draw_codes(&mut rng, &uniform, n)).unwrap();
        let b = Sequence::from_codes(draw_codes(&mut rng, &uniform, n)).unwrap();
        let params = MatchParams::new(n, m, k).unwrap();
        let (fast, naive) = (d2k_fast(&a, &b, &params).unwrap(), d2k_naive(&a, &b, &params).unwrap());
        ensure(fast == naive, || format!("random n={n} m={m} k={k}: fast {fast}, naive {naive}"))?;
        let hist = distance_histogram(&a, &b, m).unwrap();
        ensure(hist.iter().take(k + 1).sum::<u64>() == naive, || "histogram disagrees".into())?;
    }

    let n = 100_000;
    let a = Sequence::from_codes(draw_codes(&mut rng, &uniform, n)).unwrap();
    let b = Sequence::from_codes(draw_codes(&mut rng, &uniform, n)).unwrap();
    let params = MatchParams::new(n, 12, 2).unwrap();
    let start = Instant::now();
    let count = d2k_fast(&a, &b, &params).unwrap();
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("n = 1e5, m = 12 took {secs:.1} s"))?;
    Ok(format!(
        "{pairs} exhaustive pairs + 1000 random cases agree; n=1e5 m=12 in {secs:.1} s single-threaded (D = {count})"
    ))
}

fn desk_scale_grid() -> Outcome {
    let d = dist(1.0 / 3.0);
    let mut checked_a = 0;
    let mut checked_b = 0;
    let mut failures = Vec::new();
    for k in 0..=2 {
        let spec = GridSpec {
            n_values: vec![100, 200, 400],
            m_values: (2..=12).collect(),
            k,
            dist: d,
            replicates: 500,
            seed: 20_240_601,
            standardization: Standardization::EmpiricalSigma,
        };
        let grid = ks_grid(&spec).map_err(|e| e.to_string())?;
        for (cell, iso) in grid.cells.iter().zip(&grid.iso_lines) {
            for c in cell {
                // k = m makes D₂⁽ᵏ⁾ the constant n̄²: nothing to test
                if c.alpha <= 1.0 && c.mean_exact >= 50.0 && c.k < c.m {
                    checked_a += 1;
                    if c.ks.p_value <= 0.001 {
                        failures.push(format!("(a) n={} m={} k={} p={:.2e}", c.n, c.m, c.k, c.ks.p_value));
                    }
                }
                if c.m as f64 >= iso.m_alpha_two + 3.0 {
                    checked_b += 1;
                    if c.ks.p_value >= 0.001 {
                        failures.push(format!("(b) n={} m={} k={} p={:.2e}", c.n, c.m, c.k, c.ks.p_value));
                    }
                }
            }
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{checked_a} normal-regime cells accept, {checked_b} deep-regime cells reject"))
}

fn ks_calibration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pvalues: Vec<f64> = (0..400)
        .map(|_| {
            let xs: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
            ks_normal_test(&xs, 0.0, 1.0).unwrap().p_value
        })
        .collect();
    let d = ks_statistic(&pvalues, |u| u.clamp(0.0, 1.0)).unwrap();
    let second = kolmogorov_pvalue(d, pvalues.len());
    ensure(second > 0.001, || format!("p-values not uniform: second-level p = {second:.2e}"))?;

    // both series agree with each other wherever both converge quickly
    let alternating = |l: f64| -> f64 { 2.0 * (1..200).map(|j| {
        let j = j as f64;
        (if j as i64 % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * j * j * l * l).exp()
    }).sum::<f64>() };
    let theta = |l: f64| -> f64 {
        let pi2 = std::f64::consts::PI.powi(2);
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / l
            * (1..200).map(|j| {
                let o = (2 * j - 1) as f64;
                (-o * o * pi2 / (8.0 * l * l)).exp()
            }).sum::<f64>()
    };
    let mut worst = 0.0f64;
    for i in 1..=300 {
        let l = 0.2 + i as f64 * 0.01;
        let q = kolmogorov_q(l);
        worst = worst.max((q - alternating(l)).abs()).max((q - theta(l)).abs());
    }
    ensure(worst < 1e-9, || format!("series disagree by {worst:.2e}"))?;
    let median = kolmogorov_q(0.827_573_555_189_907_7);
    ensure((median - 0.5).abs() < 1e-9, || format!("Q at the median = {median}"))?;
    Ok(format!("second-level p = {second:.3}; series agree to {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("exact mean vs enumeration", exact_mean_oracle),
        ("perturbed binomial vs enumeration", perturbed_binomial_oracle),
        ("closed-form identities", closed_form_identities),
        ("bound ordering", bound_ordering),
        ("counter equivalence and speed", counter_equivalence),
        ("desk-scale KS grid", desk_scale_grid),
        ("KS calibration", ks_calibration),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({secs:.1} s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({secs:.1} s) {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    let strict = std::env::var("D2K_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
