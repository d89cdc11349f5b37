//! Crate-wide error type.

use std::fmt;
use std::io;

#[derive(Debug)]
pub enum Error {
    /// A virtual address outside the configured range `[0, K^d * P - 1]`.
    OutOfRange {
        value: u64,
        max: u64,
    },
    /// Invalid model or workload configuration.
    Config(String),
    /// An offline policy was fed an address that diverges from its trace.
    Sequence {
        index: usize,
        expected: u64,
        found: u64,
    },
    /// Malformed trace file.
    Parse(String),
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfRange { value, max } => {
                write!(f, "address {value} out of range (maximum is {max})")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Sequence {
                index,
                expected,
                found,
            } => write!(
                f,
                "trace sequencing error at position {index}: expected address {expected}, got {found}"
            ),
            Error::Parse(msg) => write!(f, "trace parse error: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
