//! Error type shared across the crate.

use std::fmt;

/// Errors produced by geometry construction, flow stepping and diagnostics.
#[derive(Debug, Clone)]
pub enum Error {
    /// The discrete surface violates a structural invariant (non-manifold
    /// connectivity, degenerate face, isolated vertex, bad grid).
    Structural(String),
    /// An argument is outside its documented domain.
    Argument(String),
    /// A time step could not be completed (solver breakdown, dt underflow).
    Step(String),
    /// A diagnostic refused to produce a value; the message carries the verdict.
    Refused(String),
    /// The operation is not defined for this surface representation.
    Unsupported(String),
    /// File ingestion or emission failed.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(m) => write!(f, "structural error: {m}"),
            Error::Argument(m) => write!(f, "argument error: {m}"),
            Error::Step(m) => write!(f, "step error: {m}"),
            Error::Refused(m) => write!(f, "refused: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
