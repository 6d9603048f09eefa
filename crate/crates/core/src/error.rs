use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("d = {0} is not one of the nine class-number-one discriminants")]
    NotClassNumberOne(i64),
    #[error("d = {0} is not a negative square-free integer")]
    NotNegativeSquarefree(i64),
    #[error("integer overflow in ring arithmetic")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("not divisible")]
    NotDivisible,
    #[error("input carries {got} fractional bits, need at least {need}")]
    PrecisionLoss { got: u32, need: u32 },
    #[error("operation undefined for the zero element")]
    ZeroElement,
    #[error("both arguments are zero")]
    BothZero,
    #[error("norm bound {0} exceeds the sieve memory guard")]
    BoundTooLarge(u64),
    #[error("alpha appears to lie in the field (exact hit at N(q) = {0})")]
    AlphaLooksRational(u64),
    #[error("no admissible approximation a/q with N(q) <= {0}")]
    NoApproximationFound(u64),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("summation range is empty")]
    RangeEmpty,
    #[error("gamma and rho must be distinct")]
    EqualArguments,
    #[error("weight support is unbounded")]
    SupportUnbounded,
    #[error("g does not vanish at r = {0} with N(r) <= x^mu")]
    GNotVanishing(String),
    #[error("unknown output format `{0}`")]
    UnknownFormat(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
