use alloc::string::String;

/// Errors raised by the exploration engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown product `{0}`")]
    UnknownProduct(String),
    #[error("review `{review}` does not belong to product `{product}`")]
    UnknownReview { product: String, review: String },
    #[error("unknown embedder `{0}`")]
    UnknownEmbedder(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("hover of {dwell_ms} ms on `{review}` is below the required {required_ms} ms")]
    DwellTooShort {
        review: String,
        dwell_ms: u64,
        required_ms: u64,
    },
    #[error("review `{0}` is not in the latest suggestion set")]
    NotSuggested(String),
    #[error("timestamp {got} precedes the previous event at {last}")]
    NonMonotonicTimestamp { last: u64, got: u64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
