use core::fmt;

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by the library.
///
/// `Input` covers malformed data handed in by the caller (bad symbols,
/// invalid parses, out-of-range positions). `Usage` covers API misuse such as
/// reusing a consumed dictionary handle or passing unsorted positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    Input(String),
    Usage(String),
    /// An internal consistency check failed.
    Invariant(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Input(msg) => write!(f, "invalid input: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Invariant(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::Error::Input(alloc::format!($($arg)*)) };
}

macro_rules! usage_err {
    ($($arg:tt)*) => { $crate::Error::Usage(alloc::format!($($arg)*)) };
}

pub(crate) use input_err;
pub(crate) use usage_err;
