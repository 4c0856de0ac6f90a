use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: Q(zeta_{0}) vs Q(zeta_{1})")]
    FieldMismatch(u32, u32),
    #[error("Q(zeta_{from}) does not embed into Q(zeta_{to})")]
    NotEmbeddable { from: u32, to: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix")]
    Singular,
    #[error("subspace is not invariant under the given matrix")]
    NotInvariant,
    #[error("closure exceeded cap {cap}")]
    CapExceeded { cap: usize },
    #[error("orbit exceeded cap {cap} (at least {partial} signatures)")]
    OrbitCapExceeded { cap: usize, partial: usize },
    #[error("unknown catalog id {0}")]
    UnknownGroup(String),
    #[error("catalog validation failed for {id}: {reason}")]
    CatalogInvalid { id: String, reason: String },
    #[error("integer overflow in packed arithmetic")]
    Overflow,
    #[error("middle convolution with lambda = 1 is not supported")]
    LambdaOne,
    #[error("middle convolution consistency failure: {0}")]
    Convolution(String),
    #[error("determinant is not a root of unity")]
    NotRootOfUnity,
    #[error("trace is not of finite-order type")]
    NotFiniteOrder,
    #[error("subgroup identification inconclusive under cap {cap}")]
    Inconclusive { cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
