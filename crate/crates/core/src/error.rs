use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("digit extraction requires a nonnegative input")]
    NegativeInput,
    #[error("value has no terminating base-{nu} expansion")]
    NonTerminatingExpansion { nu: u32 },
    #[error("encoding requires nonnegative real and imaginary parts")]
    NegativeComponent,
    #[error("class has {cardinality} members, over the enumeration limit {limit}")]
    ClassTooLarge { cardinality: String, limit: u64 },
    #[error("spectrum does not invert to a Gaussian-rational signal")]
    NonRationalResult,
    #[error("precision {precision} bits cannot decide the rounding of an enclosure")]
    PrecisionInsufficient { precision: u32 },
    #[error("enclosure radius too wide to read marker digits")]
    BallTooWide,
    #[error("marker digits are malformed: {0}")]
    MalformedDigits(String),
    #[error("support has {found} markers, sparsity bound is {bound}")]
    SparsityExceeded { found: usize, bound: usize },
    #[error("singular Vandermonde system (internal consistency failure)")]
    SingularSystem,
    #[error("solved signal is inconsistent with the observation: {0}")]
    InconsistentObservation(String),
    #[error("no class member matches the observation")]
    NoCandidate,
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("scan needs {needed} minors, over the limit {limit}")]
    ScanTooLarge { needed: String, limit: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
