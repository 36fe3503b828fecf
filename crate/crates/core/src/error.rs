use alloc::string::String;
use alloc::vec::Vec;

use crate::TokenId;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised anywhere in the decoding engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of its legal range. Carries the field name.
    #[error("value out of range for `{0}`")]
    Range(&'static str),
    #[error("token id {token} is outside the vocabulary of size {vocab_size}")]
    Vocab { token: TokenId, vocab_size: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("vector norm is too close to zero")]
    DegenerateVector,
    #[error("no scripted entry for prefix {0:?}")]
    MissingEntry(Vec<TokenId>),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
}
