use alloc::string::String;
use core::fmt;

/// Errors raised by the core library.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Malformed input (descriptor grammar, out-of-contract argument).
    Parse(String),
    /// An argument violates an operation's precondition.
    Invalid(String),
    /// The working precision cannot decide a rounding or classification.
    PrecisionExhausted(String),
    /// The dense walk support would exceed the configured cell budget.
    MemoryBudget {
        n: u32,
        cells: u128,
        budget: usize,
        suggested_prune: f64,
    },
    /// An integer result does not fit the public `i64` range.
    Overflow(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(s) => write!(f, "parse error: {s}"),
            Error::Invalid(s) => write!(f, "invalid argument: {s}"),
            Error::PrecisionExhausted(s) => write!(f, "precision exhausted: {s}"),
            Error::MemoryBudget {
                n,
                cells,
                budget,
                suggested_prune,
            } => write!(
                f,
                "memory budget exceeded at n = {n}: {cells} cells > budget {budget}; \
                 try a prune threshold of {suggested_prune:e} or a smaller nMax"
            ),
            Error::Overflow(s) => write!(f, "integer overflow: {s}"),
        }
    }
}

impl core::error::Error for Error {}
