use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the construction and of the numerical checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A symbol outside `1..=k` was used with a family of `k` maps.
    UnknownSymbol { symbol: u8, alphabet: usize },
    /// Malformed input value (parameter out of range, empty word, ...).
    InvalidInput(&'static str),
    /// Index past the end of a word.
    IndexOutOfRange { index: u64, len: u64 },
    /// A word or stage length does not fit in 64 bits.
    Overflow,
    /// The word map does not contract the interval into itself.
    NoContraction { reason: &'static str },
    /// Fixed-point iteration did not reach the tolerance within its budget.
    NoConvergence { residual: f64 },
    /// Arcs that must be pairwise disjoint intersect.
    DisjointnessFailure { level: usize },
    /// A stage parameter violates the repetitive-pattern requirements.
    InvalidStage { condition: u8, reason: &'static str },
    /// No noise word of the requested length produced a valid stage.
    NotFound { tried: u64 },
    /// Alignment horizon above the dynamic-programming cap.
    HorizonTooLarge { horizon: u64, cap: u64 },
    /// A claimed match pair failed the window comparison.
    CertificationFailure { position: u64 },
    /// A sample or enumeration budget was exceeded.
    CapExceeded { requested: u64, cap: u64 },
    /// The constructed spanning set failed its grid verification.
    SpanningVerificationFailure { test_point: f64, distance: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownSymbol { symbol, alphabet } => {
                write!(f, "symbol {symbol} is not in the alphabet 1..={alphabet}")
            }
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for word of length {len}")
            }
            Error::Overflow => f.write_str("word length overflows 64 bits"),
            Error::NoContraction { reason } => write!(f, "no contraction: {reason}"),
            Error::NoConvergence { residual } => {
                write!(f, "fixed-point iteration stalled at residual {residual:e}")
            }
            Error::DisjointnessFailure { level } => {
                write!(f, "arcs at level {level} are not pairwise disjoint")
            }
            Error::InvalidStage { condition, reason } => {
                write!(f, "condition {condition} violated: {reason}")
            }
            Error::NotFound { tried } => {
                write!(f, "no noise word produced a valid stage ({tried} candidates tried)")
            }
            Error::HorizonTooLarge { horizon, cap } => {
                write!(f, "horizon {horizon} exceeds the alignment cap {cap}")
            }
            Error::CertificationFailure { position } => {
                write!(f, "claimed match pair at position {position} fails the window test")
            }
            Error::CapExceeded { requested, cap } => {
                write!(f, "requested {requested} exceeds the cap {cap}")
            }
            Error::SpanningVerificationFailure { test_point, distance } => {
                write!(f, "spanning check failed at x = {test_point}: nearest orbit distance {distance}")
            }
        }
    }
}

impl core::error::Error for Error {}
