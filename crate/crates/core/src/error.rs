use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unexpected character {ch:?} at position {position}")]
    Syntax { position: usize, ch: char },

    #[error("letter x{index} exceeds rank {rank}")]
    RankExceeded { index: usize, rank: usize },

    #[error("rank must lie in 2..=26, got {0}")]
    InvalidRank(usize),

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("the trivial element has no cyclically reduced representative")]
    TrivialElement,

    #[error("word {0} is not reduced")]
    NotReduced(String),

    #[error("word {0} is not cyclically reduced")]
    NotCyclicallyReduced(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(u32),

    #[error("duplicate id {0}")]
    DuplicateId(u32),

    #[error("edges do not form a foldable pair: {0}")]
    NotFoldable(String),

    #[error("graph is not connected")]
    NotConnected,

    #[error("almost-rose parameters violate 1 <= k <= l <= n, k < n: n={n} k={k} l={l}")]
    ThetaConstraint { n: usize, k: usize, l: usize },

    #[error("invalid relabeling: {0}")]
    InvalidRelabeling(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("fold sequence does not factor through an almost-rose: {0}")]
    Factorization(String),

    #[error("search exceeded {limit} visited states")]
    SearchLimit { limit: u64 },

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}
