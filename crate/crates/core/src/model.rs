//! Alphabet, letter distributions, sequences and match parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Letters in code order: A=00, C=01, G=10, T=11.
pub const ALPHABET: [u8; 4] = *b"ACGT";

/// Largest admissible sequence length; keeps `n̄²` inside `u64`.
pub const MAX_SEQUENCE_LEN: usize = (1 << 31) - 1;

const SUM_TOLERANCE: f64 = 1e-12;

#[inline]
pub fn encode_letter(b: u8) -> Option<u8> {
    match b {
        b'A' | b'a' => Some(0),
        b'C' | b'c' => Some(1),
        b'G' | b'g' => Some(2),
        b'T' | b't' => Some(3),
        _ => None,
    }
}

#[inline]
pub fn decode_letter(code: u8) -> u8 {
    ALPHABET[usize::from(code & 3)]
}

#[inline]
fn is_gc(code: u8) -> bool {
    code == 1 || code == 2
}

/// Probabilities of A, C, G, T, optionally tied to a strand-symmetric
/// perturbation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterDistribution {
    probs: [f64; 4],
    eta: Option<f64>,
}

impl LetterDistribution {
    /// `ξ_A = ξ_T = (1+η)/4`, `ξ_C = ξ_G = (1−η)/4`.
    pub fn strand_symmetric(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta.abs() >= 1.0 {
            return Err(Error::EtaOutOfRange(eta));
        }
        let at = (1.0 + eta) / 4.0;
        let gc = (1.0 - eta) / 4.0;
        Ok(Self {
            probs: [at, gc, gc, at],
            eta: Some(eta),
        })
    }

    pub fn uniform() -> Self {
        Self {
            probs: [0.25; 4],
            eta: Some(0.0),
        }
    }

    /// Arbitrary letter frequencies in A, C, G, T order. The result carries no
    /// perturbation parameter even if the frequencies happen to be symmetric.
    pub fn from_frequencies(probs: [f64; 4]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "frequencies must lie in [0, 1], got {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "frequencies must sum to 1, got {total}"
            )));
        }
        Ok(Self { probs, eta: None })
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn prob(&self, code: u8) -> f64 {
        self.probs[usize::from(code & 3)]
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn require_eta(&self) -> Result<f64> {
        self.eta.ok_or(Error::NotStrandSymmetric)
    }

    pub fn is_uniform(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.25)
    }

    /// `p_t = Σ_a ξ_a^t`, the probability that `t` independent letters agree.
    pub fn p_moment(&self, t: u32) -> Result<f64> {
        if t < 2 {
            return Err(Error::OutOfRange(format!("p_t needs t >= 2, got {t}")));
        }
        Ok(self.probs.iter().map(|p| p.powi(t as i32)).sum())
    }

    pub fn p2(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    pub fn p3(&self) -> f64 {
        self.probs.iter().map(|p| p * p * p).sum()
    }
}

/// A non-empty DNA sequence stored as one 2-bit code per byte.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    codes: Vec<u8>,
}

impl Sequence {
    /// Builds a sequence from 2-bit codes (values 0..=3).
    pub fn from_codes(codes: Vec<u8>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some((offset, &c)) = codes.iter().enumerate().find(|(_, &c)| c > 3) {
            return Err(Error::InvalidLetter {
                ch: char::from(c),
                offset,
            });
        }
        Ok(Self { codes })
    }

    /// Parses the plain-text sequence file format: ACGT in any case,
    /// whitespace ignored, no FASTA headers.
    pub fn parse_text(text: &str) -> Result<Self> {
        if text.lines().any(|line| line.trim_start().starts_with('>')) {
            return Err(Error::FastaHeader);
        }
        let mut codes = Vec::with_capacity(text.len());
        for (offset, ch) in text.char_indices() {
            if ch.is_whitespace() {
                continue;
            }
            let code = u8::try_from(ch)
                .ok()
                .and_then(encode_letter)
                .ok_or(Error::InvalidLetter { ch, offset })?;
            codes.push(code);
        }
        if codes.len() > MAX_SEQUENCE_LEN {
            return Err(Error::OutOfRange(format!(
                "sequence length {} exceeds {MAX_SEQUENCE_LEN}",
                codes.len()
            )));
        }
        Self::from_codes(codes)
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Number of C or G letters.
    pub fn gc_count(&self) -> usize {
        gc_count_codes(&self.codes)
    }

    /// Probability of this exact string under `dist`.
    pub fn probability(&self, dist: &LetterDistribution) -> f64 {
        self.codes.iter().map(|&c| dist.prob(c)).product()
    }
}

impl FromStr for Sequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ascii: String = self.codes.iter().map(|&c| char::from(decode_letter(c))).collect();
        f.write_str(&ascii)
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({self})")
    }
}

pub fn gc_count_codes(codes: &[u8]) -> usize {
    codes.iter().filter(|&&c| is_gc(c)).count()
}

/// Number of mismatching positions between two equal-length sequences.
pub fn hamming(x: &Sequence, y: &Sequence) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(hamming_codes(x.codes(), y.codes()))
}

#[inline]
pub fn hamming_codes(x: &[u8], y: &[u8]) -> usize {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Up to 32 letters packed two bits each into a `u64`, first letter in the
/// lowest bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PackedWord {
    bits: u64,
    len: u8,
}

impl PackedWord {
    pub const MAX_LEN: usize = 32;

    pub fn pack(codes: &[u8]) -> Option<Self> {
        if codes.len() > Self::MAX_LEN {
            return None;
        }
        let bits = codes
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | (u64::from(c & 3) << (2 * i)));
        Some(Self {
            bits,
            len: codes.len() as u8,
        })
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Mismatch count via XOR and popcount of the per-letter "differs" bit.
    #[inline]
    pub fn hamming(&self, other: &Self) -> u32 {
        debug_assert_eq!(self.len, other.len);
        let x = self.bits ^ other.bits;
        ((x | (x >> 1)) & 0x5555_5555_5555_5555).count_ones()
    }
}

/// The `(n, m, k)` description of a word-match problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl MatchParams {
    /// Requires `1 ≤ m < n`, `k ≤ m` and `n` below [`MAX_SEQUENCE_LEN`].
    /// `k = m` is admitted as the degenerate "everything matches" case.
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("word length m must be at least 1".into()));
        }
        if m >= n {
            return Err(Error::InvalidParams(format!(
                "word length m = {m} must be smaller than n = {n}"
            )));
        }
        if k > m {
            return Err(Error::InvalidParams(format!(
                "mismatch budget k = {k} exceeds word length m = {m}"
            )));
        }
        if n > MAX_SEQUENCE_LEN {
            return Err(Error::InvalidParams(format!(
                "n = {n} exceeds {MAX_SEQUENCE_LEN}"
            )));
        }
        Ok(Self { n, m, k })
    }

    /// `n̄ = n − m + 1`, the number of word start positions.
    pub fn nbar(&self) -> usize {
        self.n - self.m + 1
    }

    /// `n̄²`, the number of index pairs.
    pub fn pair_count(&self) -> u64 {
        let nb = self.nbar() as u64;
        nb * nb
    }
}
