use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not an odd prime power")]
    NotOddPrimePower(u64),
    #[error("field order {order} exceeds the size bound {bound}")]
    SizeBoundExceeded { order: u128, bound: u64 },
    #[error("element does not belong to this field context")]
    ContextMismatch,
    #[error("extension parameter {0} is zero or a square in the base field")]
    SquareParameter(String),
    #[error("operation requires a finite base field")]
    InfiniteBase,
    #[error("{what} needs {needed} evaluations, budget allows {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("triple is not admissible")]
    InadmissibleTriple,
    #[error("positivity certificate is only defined for the extension by sqrt(-1)")]
    WrongExtension,
    #[error("{0} does not lie in l*(c, d)")]
    NotAWitness(String),
    #[error("group element does not carry the source triple to the target triple")]
    NotCarried,
    #[error("c2 / a^2 leaves the base field; a must lie in the punctured axes")]
    ActionLeavesBase,
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
