use thiserror::Error;

/// Errors raised by the verification engine.
///
/// Verification *failures* (an identity that does not hold) are never errors;
/// they are reported as `false` verdicts. Errors are reserved for malformed
/// input and violated preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands live on different variable tables or truncation bounds.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// A mathematical precondition failed (zero constant term, d = 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A Chow-ring model failed validation.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The operation needs structure the model does not declare.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Text input (bundle expressions, K-expressions, scripts) failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// An operation precondition was violated by a well-formed input.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
