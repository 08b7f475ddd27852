use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring descriptor: {0}")]
    InvalidRing(String),
    #[error("elements belong to different rings")]
    RingMismatch,
    #[error("element is not a unit (valuation {0})")]
    NonUnit(u32),
    #[error("root-of-unity order {0} is divisible by p")]
    OrderDivisibleByP(u64),
    #[error("bad precision {requested} (ring precision {available})")]
    BadPrecision { requested: u32, available: u32 },
    #[error("invalid group data: {0}")]
    InvalidGroup(String),
    #[error("elements belong to different group rings")]
    GroupMismatch,
    #[error("required roots of unity are missing from the coefficient ring")]
    MissingRoots,
    #[error("group order {0} is not coprime to p")]
    OrderNotCoprime(u64),
    #[error("{0} does not generate its cyclic factor")]
    NonGenerator(String),
    #[error("evaluation value must be congruent to 1 mod the uniformizer")]
    NotOneModPi,
    #[error("evaluation is not well defined: {0}")]
    IllDefinedEvaluation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed quotient data: {0}")]
    MalformedQuotient(String),
    #[error("incompatible ring map: {0}")]
    IncompatibleMap(String),
    #[error("underlying module is not free over Z/p^N")]
    UnderlyingNotFree,
    #[error("divisor is not a distinguished polynomial")]
    NotDistinguished,
    #[error("zero ideal")]
    ZeroIdeal,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("pair ({0}, {1}) is not unimodular")]
    NotUnimodular(i64, i64),
    #[error("search box exhausted after {0} candidates")]
    SearchExhausted(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("inadmissible prime {0}: {1}")]
    InadmissiblePrime(String, String),
    #[error("H_n-invariance fails for the derivative at {0}")]
    InvarianceFailure(String),
    #[error("restriction preimage system is inconsistent")]
    PreimageInconsistent,
    #[error("linear system is inconsistent: {0}")]
    InconsistentSystem(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
