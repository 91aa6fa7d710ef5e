//! Brute-force oracles shared by the integration suites. Nothing here calls the
//! grouped formulas it is used to check.

#![allow(dead_code)]

use d2k::model::{hamming_codes, LetterDistribution, Sequence};
use d2k::numeric::{compensated_sum, CompensatedSum};
use rand::Rng;

/// Codes of the `index`-th word of length `len` over an alphabet of `base`
/// letters (letter codes `0..base`), least significant letter first.
pub fn word_codes(mut index: u64, len: usize, base: u64) -> Vec<u8> {
    (0..len)
        .map(|_| {
            let c = (index % base) as u8;
            index /= base;
            c
        })
        .collect()
}

pub fn all_words(len: usize, base: u64) -> Vec<Vec<u8>> {
    (0..base.pow(len as u32)).map(|i| word_codes(i, len, base)).collect()
}

pub fn all_sequences(len: usize, base: u64) -> Vec<Sequence> {
    all_words(len, base)
        .into_iter()
        .map(|w| Sequence::from_codes(w).unwrap())
        .collect()
}

pub fn word_prob(codes: &[u8], dist: &LetterDistribution) -> f64 {
    codes.iter().map(|&c| dist.probs()[c as usize]).product()
}

pub fn gc_of(codes: &[u8]) -> usize {
    codes.iter().filter(|&&c| c == 1 || c == 2).count()
}

/// `Pr(δ(T, q) = k)` for `k = 0..=m` by summing over every text `T`.
pub fn text_distance_law(query: &[u8], dist: &LetterDistribution) -> Vec<f64> {
    let m = query.len();
    let mut law = vec![CompensatedSum::new(); m + 1];
    for text in all_words(m, 4) {
        law[hamming_codes(&text, query)].add(word_prob(&text, dist));
    }
    law.iter().map(CompensatedSum::value).collect()
}

/// Law of the distance between two independent random `t`-words by summing
/// over all `4^t × 4^t` pairs.
pub fn pair_distance_law(t: usize, dist: &LetterDistribution) -> Vec<f64> {
    let words = all_words(t, 4);
    let probs: Vec<f64> = words.iter().map(|w| word_prob(w, dist)).collect();
    let mut law = vec![CompensatedSum::new(); t + 1];
    for (x, px) in words.iter().zip(&probs) {
        for (y, py) in words.iter().zip(&probs) {
            law[hamming_codes(x, y)].add(px * py);
        }
    }
    law.iter().map(CompensatedSum::value).collect()
}

/// Distance histogram of all word pairs, by direct comparison.
pub fn naive_histogram(a: &[u8], b: &[u8], m: usize) -> Vec<u64> {
    let nbar = a.len() - m + 1;
    let mut hist = vec![0u64; m + 1];
    for i in 0..nbar {
        for j in 0..nbar {
            hist[hamming_codes(&a[i..i + m], &b[j..j + m])] += 1;
        }
    }
    hist
}

/// Exact `E[D₂⁽ᵏ⁾]` and `Var(D₂⁽ᵏ⁾)` for `k = 0..=m` by enumerating every
/// sequence pair of length `n`, for each distribution in `dists`.
pub fn enumerate_pair_moments(n: usize, m: usize, dists: &[LetterDistribution]) -> Vec<Vec<(f64, f64)>> {
    let seqs = all_words(n, 4);
    let probs: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| seqs.iter().map(|s| word_prob(s, d)).collect())
        .collect();
    // first and second raw moments per (dist, k)
    let mut first = vec![vec![Vec::new(); m + 1]; dists.len()];
    let mut second = vec![vec![Vec::new(); m + 1]; dists.len()];
    for (ia, a) in seqs.iter().enumerate() {
        let mut row1 = vec![vec![0.0; m + 1]; dists.len()];
        let mut row2 = vec![vec![0.0; m + 1]; dists.len()];
        for (ib, b) in seqs.iter().enumerate() {
            let hist = naive_histogram(a, b, m);
            let mut cum = 0u64;
            for k in 0..=m {
                cum += hist[k];
                let d = cum as f64;
                for (di, p) in probs.iter().enumerate() {
                    let w = p[ib];
                    row1[di][k] += w * d;
                    row2[di][k] += w * d * d;
                }
            }
        }
        for (di, p) in probs.iter().enumerate() {
            for k in 0..=m {
                first[di][k].push(p[ia] * row1[di][k]);
                second[di][k].push(p[ia] * row2[di][k]);
            }
        }
    }
    (0..dists.len())
        .map(|di| {
            (0..=m)
                .map(|k| {
                    let e1 = compensated_sum(first[di][k].iter().copied());
                    let e2 = compensated_sum(second[di][k].iter().copied());
                    (e1, e2 - e1 * e1)
                })
                .collect()
        })
        .collect()
}

/// Letter codes drawn from `dist`, independent of the library's generator.
pub fn draw_codes<R: Rng>(rng: &mut R, dist: &LetterDistribution, len: usize) -> Vec<u8> {
    let p = dist.probs();
    (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (c, pc) in p.iter().enumerate() {
                acc += pc;
                if u < acc {
                    return c as u8;
                }
            }
            3
        })
        .collect()
}

/// Sample covariance of paired indicator draws with its standard error.
pub struct CovEstimate {
    pub cov: f64,
    pub se: f64,
    pub corr: f64,
}

pub fn covariance_estimate(xs: &[f64], ys: &[f64]) -> CovEstimate {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let cov = prods.iter().sum::<f64>() / (n - 1.0);
    let var_prod = prods.iter().map(|p| (p - cov) * (p - cov)).sum::<f64>() / (n - 1.0);
    let vx = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / (n - 1.0);
    let vy = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / (n - 1.0);
    let corr = if vx > 0.0 && vy > 0.0 { cov / (vx * vy).sqrt() } else { 0.0 };
    CovEstimate {
        cov,
        se: (var_prod / n).sqrt(),
        corr,
    }
}

/// Composite Simpson integral of the standard normal density over `[0, x]`,
/// plus one half.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    let steps = 20_000;
    let h = x / steps as f64;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = density(0.0) + density(x);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * density(i as f64 * h);
    }
    0.5 + acc * h / 3.0
}
