use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("perturbation parameter eta = {0} must lie strictly inside (-1, 1)")]
    EtaOutOfRange(f64),

    #[error("invalid letter distribution: {0}")]
    InvalidDistribution(String),

    #[error("operation requires a strand-symmetric distribution (--eta); general letter frequencies only support k = 0")]
    NotStrandSymmetric,

    #[error("invalid match parameters: {0}")]
    InvalidParams(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("position ({i}, {j}) outside 1..={max}")]
    PositionOutOfRange { i: usize, j: usize, max: usize },

    #[error("invalid character {ch:?} at offset {offset}; only A, C, G, T (any case) are allowed")]
    InvalidLetter { ch: char, offset: usize },

    #[error("input looks like FASTA (line starting with '>'); remove the header line and keep only the sequence")]
    FastaHeader,

    #[error("sequence is empty")]
    EmptySequence,

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("empty sample")]
    EmptySample,

    #[error("cell n={n} m={m} k={k} failed: {source}")]
    Cell {
        n: usize,
        m: usize,
        k: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
