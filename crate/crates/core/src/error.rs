use thiserror::Error;

/// Errors raised while reading inputs or checking cross-object consistency.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),

    #[error("record `{0}` has an empty sequence")]
    EmptySequence(String),

    #[error("record `{id}`: invalid nucleotide `{ch}`")]
    InvalidBase { id: String, ch: char },

    #[error("cds `{cds}`: exons overlap or are out of order")]
    ExonChain { cds: String },

    #[error("cds `{cds}`: exon ({start},{end}) outside gene `{gene}` of length {len}")]
    ExonOutOfRange {
        cds: String,
        gene: String,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("unknown gene `{0}`")]
    UnknownGene(String),

    #[error("unknown sequence `{0}`")]
    UnknownSequence(String),

    #[error("alignment ids do not match: expected {expected}, found {found}")]
    AlignmentMismatch { expected: String, found: String },

    #[error("missing alignment for pair(s): {0}")]
    MissingAlignment(String),

    #[error("config: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("round-trip violation for row `{0}`")]
    RoundTrip(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
