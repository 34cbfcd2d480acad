use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group parameters: {0}")]
    InvalidGroup(String),

    #[error("a0 has not been bound; construct the residue field first")]
    A0Unbound,

    #[error("no exponent a0 with zeta_m^a0 = {alpha} in the residue field")]
    NoDiscreteLog { alpha: u64 },

    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("element is not divisible by the uniformizer (residue is nonzero)")]
    NotDivisible,

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid summand: {0}")]
    InvalidSummand(String),

    #[error("group action is not faithful (ord_(p^i)(alpha) != m for some i); {0}")]
    NotFaithful(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("divisibility violated at column {column}, row {row}: valuation {valuation} < {required}")]
    Divisibility {
        column: usize,
        row: usize,
        valuation: u32,
        required: u32,
    },

    #[error("unsupported subdiagonal entry at position {0}: expected 0, 1 or a power of the uniformizer")]
    UnsupportedSubdiagonal(usize),

    #[error("module relations violated: {0}")]
    RelationViolation(String),

    #[error("reduction mismatch: computed {computed}, predicted {predicted}")]
    ReductionMismatch { computed: String, predicted: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Errors that a rebuild at higher p-adic precision may cure.
    pub fn is_precision_related(&self) -> bool {
        matches!(self, Error::PrecisionExhausted(_))
    }
}
