use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("NonPrime: {0} is not prime")]
    NonPrime(u64),
    #[error("NonIncreasingExponents: block {index} has exponent {n} not greater than its predecessor")]
    NonIncreasingExponents { index: usize, n: u32 },
    #[error("ZeroRank: block {0} has rank 0")]
    ZeroRank(usize),
    #[error("ZeroExponent: block {0} has exponent 0")]
    ZeroExponent(usize),
    #[error("EmptyBlocks: a group needs at least one block")]
    EmptyBlocks,
    #[error("ModulusTooLarge: p^n = {p}^{n} exceeds 2^32")]
    ModulusTooLarge { p: u64, n: u32 },
    #[error("TrivialResult: p^{k}G is trivial")]
    TrivialResult { k: u32 },
    #[error("SingleBlock: operation needs at least two blocks")]
    SingleBlock,
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("SpecMismatch: operands belong to different groups")]
    SpecMismatch,
    #[error("ConstraintViolation: cell ({target},{src}) violates the Hom divisibility constraint")]
    ConstraintViolation { target: usize, src: usize },
    #[error("NonCanonicalEntry: cell ({target},{src}) holds {value}, not reduced mod {modulus}")]
    NonCanonicalEntry { target: usize, src: usize, value: u64, modulus: u64 },
    #[error("NotAUnit: endomorphism is not invertible")]
    NotAUnit,
    #[error("PreconditionGap: exponent gaps too small, corner map is not multiplicative")]
    PreconditionGap { corner: crate::matrix::ModMatrix },
    #[error("PreconditionViolation: {0}")]
    PreconditionViolation(String),
    #[error("RankTooSmall: first block has rank 1, no transvection")]
    RankTooSmall,
    #[error("BudgetExceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded { what: &'static str, needed: String, budget: u64 },
    #[error("Overflow: closure exceeded cap {cap}")]
    Overflow { cap: usize },
    #[error("NotSplitBlock: block (p={p}, n={n}, r={r}) does not split")]
    NotSplitBlock { p: u64, n: u32, r: usize },
    #[error("MissingBlockSection: no section supplied for block {0}")]
    MissingBlockSection(usize),
    #[error("VerificationFailed: {reason}")]
    VerificationFailed { reason: String, pair: Option<(usize, usize)> },
    #[error("Io: {0}")]
    Io(String),
    #[error("Json: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
