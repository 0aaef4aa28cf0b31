use thiserror::Error;

/// Errors raised by the analysis toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("basis needs at least two generators, got {0}")]
    BasisTooSmall(usize),
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid generator label `{0}`")]
    InvalidLabel(String),
    #[error("letter index {index} out of range for basis of rank {rank}")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("words live over different bases")]
    BasisMismatch,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("basis change fails its round-trip witness at generator `{0}`")]
    InvalidBasisChange(String),
    #[error("generator `{0}` has empty image")]
    EmptyImage(String),
    #[error("image table has {got} entries, basis has rank {rank}")]
    ImageCount { got: usize, rank: usize },
    #[error("inverse witness does not compose to the identity")]
    InverseWitness,
    #[error("rank {0} is not supported here (need n >= {1})")]
    RankTooSmall(usize, usize),
    #[error("seed of ray `{0}` is not attracting")]
    NotAttracting(String),
    #[error("seed must be a nonempty word")]
    EmptySeed,
    #[error("rays `{0}` and `{1}` agree up to depth {2}; distinctness inconclusive")]
    InconclusiveDistinctness(String, String, usize),
    #[error("n = 2 is degenerate: Y_0 and Y are related by a fixed element")]
    DegenerateRankTwo,
    #[error("automorphism is not positive in its basis; the rose is not a train track for it")]
    NotPositive,
    #[error("matrix has no nonzero entry")]
    ZeroMatrix,
    #[error("matrix is not primitive")]
    NotPrimitive,
    #[error("image tables exceed the memory budget of {0} letters")]
    MemoryBudget(usize),
    #[error("inventory is not certified")]
    UncertifiedInventory,
}

pub type Result<T> = std::result::Result<T, Error>;
