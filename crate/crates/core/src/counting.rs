//! Counting `D₂⁽ᵏ⁾` and classifying pairs of index pairs by how their words overlap.
//!
//! Positions in the public API are 1-based, `1 ≤ i, j ≤ n̄`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hamming_codes, MatchParams, PackedWord, Sequence};

fn check_inputs(a: &Sequence, b: &Sequence, params: &MatchParams) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() != params.n {
        return Err(Error::InvalidParams(format!(
            "sequences have length {} but n = {}",
            a.len(),
            params.n
        )));
    }
    Ok(())
}

/// `Y_ij⁽ᵏ⁾`: whether the words starting at `i` in `a` and `j` in `b` are within
/// `k` mismatches.
pub fn y_indicator(
    a: &Sequence,
    b: &Sequence,
    i: usize,
    j: usize,
    params: &MatchParams,
) -> Result<bool> {
    check_inputs(a, b, params)?;
    let nbar = params.nbar();
    if i == 0 || j == 0 || i > nbar || j > nbar {
        return Err(Error::PositionOutOfRange { i, j, max: nbar });
    }
    let m = params.m;
    let x = &a.codes()[i - 1..i - 1 + m];
    let y = &b.codes()[j - 1..j - 1 + m];
    let dist = match (PackedWord::pack(x), PackedWord::pack(y)) {
        (Some(px), Some(py)) => px.hamming(&py) as usize,
        _ => hamming_codes(x, y),
    };
    Ok(dist <= params.k)
}

/// Reference counter: compares every pair of words letter by letter.
pub fn d2k_naive(a: &Sequence, b: &Sequence, params: &MatchParams) -> Result<u64> {
    check_inputs(a, b, params)?;
    let (m, k, nbar) = (params.m, params.k, params.nbar());
    let (a, b) = (a.codes(), b.codes());
    let mut count = 0u64;
    for i in 0..nbar {
        for j in 0..nbar {
            if hamming_codes(&a[i..i + m], &b[j..j + m]) <= k {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// The aligned letter strips of diagonal `d = j − i`.
fn diagonal<'s>(a: &'s [u8], b: &'s [u8], d: isize) -> (&'s [u8], &'s [u8]) {
    let n = a.len();
    if d >= 0 {
        let d = d as usize;
        (&a[..n - d], &b[d..])
    } else {
        let d = d.unsigned_abs();
        (&a[d..], &b[..n - d])
    }
}

/// Feeds the mismatch count of every window on one diagonal to `visit`,
/// updating the count by the letter entering and the letter leaving.
#[inline]
fn scan_diagonal(x: &[u8], y: &[u8], m: usize, buf: &mut Vec<u8>, mut visit: impl FnMut(u32)) {
    buf.clear();
    buf.extend(x.iter().zip(y).map(|(p, q)| u8::from(p != q)));
    let mut running: u32 = buf[..m].iter().map(|&v| u32::from(v)).sum();
    visit(running);
    for (enter, leave) in buf[m..].iter().zip(buf.iter()) {
        running = running + u32::from(*enter) - u32::from(*leave);
        visit(running);
    }
}

fn count_diagonal(x: &[u8], y: &[u8], m: usize, k: u32, buf: &mut Vec<u8>) -> u64 {
    let mut count = 0u64;
    scan_diagonal(x, y, m, buf, |s| count += u64::from(s <= k));
    count
}

/// Incremental-diagonal counter: walks each constant-`(j − i)` diagonal once,
/// so the total work is `O(n̄² + n̄·m)` letter comparisons.
pub fn d2k_fast(a: &Sequence, b: &Sequence, params: &MatchParams) -> Result<u64> {
    check_inputs(a, b, params)?;
    if params.k >= params.m {
        return Ok(params.pair_count());
    }
    let reach = params.nbar() as isize - 1;
    let mut buf = Vec::with_capacity(params.n);
    let total = (-reach..=reach)
        .map(|d| {
            let (x, y) = diagonal(a.codes(), b.codes(), d);
            count_diagonal(x, y, params.m, params.k as u32, &mut buf)
        })
        .sum();
    Ok(total)
}

/// [`d2k_fast`] with diagonals spread over the rayon pool. The result does not
/// depend on the schedule.
pub fn d2k_fast_parallel(a: &Sequence, b: &Sequence, params: &MatchParams) -> Result<u64> {
    check_inputs(a, b, params)?;
    if params.k >= params.m {
        return Ok(params.pair_count());
    }
    let reach = params.nbar() as isize - 1;
    let total = (-reach..=reach)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(params.n),
            |buf, d| {
                let (x, y) = diagonal(a.codes(), b.codes(), d);
                count_diagonal(x, y, params.m, params.k as u32, buf)
            },
        )
        .sum();
    Ok(total)
}

/// Number of index pairs at each Hamming distance `0..=m`; its prefix sums are
/// `D₂⁽ᵏ⁾` for every `k` at once.
pub fn distance_histogram(a: &Sequence, b: &Sequence, m: usize) -> Result<Vec<u64>> {
    let params = MatchParams::new(a.len(), m, 0)?;
    check_inputs(a, b, &params)?;
    let reach = params.nbar() as isize - 1;
    let mut hist = vec![0u64; m + 1];
    let mut buf = Vec::with_capacity(params.n);
    for d in -reach..=reach {
        let (x, y) = diagonal(a.codes(), b.codes(), d);
        scan_diagonal(x, y, m, &mut buf, |s| hist[s as usize] += 1);
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairTag {
    Independent,
    Crabgrass,
    Accordion,
}

/// Overlap geometry of two index pairs `u = (i, j)`, `v = (i', j')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairClass {
    pub tag: PairTag,
    /// Crabgrass: the offset below `m`. Accordion: the smaller offset.
    pub overlap_t: Option<usize>,
}

pub fn classify_pair(u: (usize, usize), v: (usize, usize), m: usize) -> PairClass {
    let di = u.0.abs_diff(v.0);
    let dj = u.1.abs_diff(v.1);
    match (di < m, dj < m) {
        (true, true) => PairClass {
            tag: PairTag::Accordion,
            overlap_t: Some(di.min(dj)),
        },
        (true, false) => PairClass {
            tag: PairTag::Crabgrass,
            overlap_t: Some(di),
        },
        (false, true) => PairClass {
            tag: PairTag::Crabgrass,
            overlap_t: Some(dj),
        },
        (false, false) => PairClass {
            tag: PairTag::Independent,
            overlap_t: None,
        },
    }
}

/// Ordered pairs of positions in `1..=nbar` exactly `t` apart.
fn pairs_at_offset(nbar: u64, t: u64) -> u64 {
    match t {
        0 => nbar,
        t if t < nbar => 2 * (nbar - t),
        _ => 0,
    }
}

/// Ordered pairs of positions in `1..=nbar` at least `m` apart.
fn pairs_at_least(nbar: u64, m: u64) -> u64 {
    if nbar > m {
        (nbar - m) * (nbar - m + 1)
    } else {
        0
    }
}

/// Exact number of ordered pairs `(u, v)`, both in the index set, that are
/// crabgrass-related with overlap exactly `t`. Boundary positions are counted
/// exactly.
pub fn count_crabgrass_pairs(n: usize, m: usize, t: usize) -> Result<u64> {
    if m == 0 || t >= m {
        return Err(Error::OutOfRange(format!("overlap t = {t} must be below m = {m}")));
    }
    if n <= m {
        return Err(Error::InvalidParams(format!("need n > m, got n = {n}, m = {m}")));
    }
    let nbar = (n - m + 1) as u64;
    // the short offset can sit on either coordinate
    Ok(2 * pairs_at_offset(nbar, t as u64) * pairs_at_least(nbar, m as u64))
}

/// `Σ_u Σ_{v crabgrass} q^(m−t)` from the exact pair counts.
pub fn crabgrass_weighted_sum_exact(n: usize, m: usize, q: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in 0..m {
        total += count_crabgrass_pairs(n, m, t)? as f64 * q.powi((m - t) as i32);
    }
    Ok(total)
}

/// The interior approximation `n̄²(2n̄ − 4m + 2)[2q(1 − q^m)/(1 − q) − q^m]` of
/// the same sum, which treats every `u` as if it were far from the ends.
pub fn crabgrass_weighted_sum_interior(n: usize, m: usize, q: f64) -> f64 {
    let nbar = (n - m + 1) as f64;
    let m_f = m as f64;
    let geometric = 2.0 * q * (1.0 - q.powi(m as i32)) / (1.0 - q) - q.powi(m as i32);
    nbar * nbar * (2.0 * nbar - 4.0 * m_f + 2.0) * geometric
}
