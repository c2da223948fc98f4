//! Error type shared across the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// An operation that needs at least one value was given none.
    EmptyInput(&'static str),
    /// A `.bf16` payload must be an even number of bytes (little-endian u16s).
    OddByteLength(usize),
    /// Codebook construction was asked to code zero symbols.
    NoSymbols,
    /// A set of code lengths does not satisfy the Kraft equality required of a
    /// complete canonical code.
    KraftViolation { detail: String },
    /// A serialized codebook header failed validation.
    BadCodebookHeader { detail: String },
    /// Container prefix is not the expected magic.
    BadMagic([u8; 4]),
    /// Container version byte is unknown.
    UnsupportedVersion(u8),
    /// A plane or bitstream ended before the declared number of values.
    Truncated { what: &'static str },
    /// Framing metadata is inconsistent with the bytes that follow it.
    Framing { detail: String },
    /// Compressed payload bits do not parse as the declared code.
    CorruptStream { detail: String },
    /// A baseline codec record is malformed (e.g. zero-length run).
    CorruptRecord { detail: String },
    /// A trace row or CLI value failed to parse.
    InvalidInput { detail: String },
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::OddByteLength(n) => {
                write!(f, "BF16 payload must be an even byte count, got {n}")
            }
            Error::NoSymbols => write!(f, "cannot build a codebook over zero symbols"),
            Error::KraftViolation { detail } => write!(f, "Kraft equality violated: {detail}"),
            Error::BadCodebookHeader { detail } => write!(f, "bad codebook header: {detail}"),
            Error::BadMagic(m) => write!(f, "bad container magic {m:02x?}"),
            Error::UnsupportedVersion(v) => write!(f, "unsupported container version {v}"),
            Error::Truncated { what } => write!(f, "truncated input while reading {what}"),
            Error::Framing { detail } => write!(f, "framing error: {detail}"),
            Error::CorruptStream { detail } => write!(f, "corrupt stream: {detail}"),
            Error::CorruptRecord { detail } => write!(f, "corrupt record: {detail}"),
            Error::InvalidInput { detail } => write!(f, "invalid input: {detail}"),
            Error::Io(e) => write!(f, "io error: {e}"),
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

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
