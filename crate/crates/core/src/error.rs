use alloc::string::String;
use core::fmt;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input violates a documented precondition (shape, range, count).
    InvalidInput(String),
    /// A bone of zero length has no direction to normalize.
    ZeroLengthBone { joint: String },
    /// A named joint is not present in the skeleton.
    UnknownJoint(String),
    /// Point set too degenerate to define a rotation.
    DegeneratePoints(String),
    /// Forward or loss computation produced NaN or infinity.
    NonFinite(String),
    /// Linear system could not be factorized.
    Singular(String),
    /// A label has no entry in the class merge map.
    UnmappedLabels(alloc::vec::Vec<String>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ZeroLengthBone { joint } => {
                write!(f, "bone ending at joint `{joint}` has zero length")
            }
            Error::UnknownJoint(name) => write!(f, "unknown joint `{name}`"),
            Error::DegeneratePoints(msg) => write!(f, "degenerate point set: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Singular(msg) => write!(f, "singular system: {msg}"),
            Error::UnmappedLabels(labels) => {
                write!(f, "labels missing from merge map: {}", labels.join(", "))
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
