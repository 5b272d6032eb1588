use thiserror::Error;

/// Errors raised by the arithmetic, curve, field and Iwasawa layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty range: bound {0} is below 2")]
    EmptyRange(u64),
    #[error("invalid modulus {0}: expected an odd prime")]
    InvalidModulus(u64),
    #[error("valuation of zero is infinite")]
    InfiniteValuation,
    #[error("{a} is not a unit modulo {m}")]
    NonUnit { a: i64, m: u64 },
    #[error("singular curve: discriminant is zero")]
    SingularCurve,
    #[error("model is not minimal at {0}")]
    NotMinimal(u64),
    #[error("curve has bad reduction at {0}")]
    BadReduction(u64),
    #[error("invalid twist parameter {0}: must be nonzero and squarefree")]
    InvalidTwist(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("series is zero at the tracked precision p^{0}")]
    Indeterminate(u32),
    #[error("Euler characteristic undefined: constant term is zero")]
    EulerCharUndefined,
    #[error("prime {0} equals p and is excluded")]
    ExcludedPrime(u64),
    #[error("no cyclic degree-{p} extension is tamely ramified at {ell} (needs {ell} = 1 mod {p})")]
    ClassFieldObstruction { p: u64, ell: u64 },
    #[error("wrong operation: {0}")]
    WrongOperation(String),
    #[error("hypotheses not satisfied: {0}")]
    Blocked(String),
    #[error("assumption not satisfied: {0}")]
    AssumptionNotSatisfied(String),
    #[error("twisted curve is supersingular at {0}")]
    Supersingular(u64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("least-squares fit unavailable: {0}")]
    FitUnavailable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error in field `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by unmet arithmetic hypotheses, as opposed to
    /// bad input or internal faults.
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            Error::Blocked(_)
                | Error::AssumptionNotSatisfied(_)
                | Error::Supersingular(_)
                | Error::Precondition(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
