use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The CLI maps [`Error::Config`] and [`Error::Domain`] to exit code 2 and
/// [`Error::Numerical`] and [`Error::Normalization`] to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A weight law produced no positive mass.
    #[error("normalization error: {0}")]
    Normalization(String),
    /// A linear system or iteration failed numerically.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A configuration key or value was rejected.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
