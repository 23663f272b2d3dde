//! Review-exploration engine core.
//!
//! Tracks which reviews a reader has visited and implicitly covered,
//! computes the Visit / Coverage / Distribution exploration metrics, and
//! ranks bias-mitigating suggestions that trade semantic dissimilarity
//! against sentiment balance.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, persistence,
//! the HTTP service and the simulation harness live in the `revex` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod embedding;
mod error;
pub mod keywords;
pub mod replay;
pub mod search;
pub mod session;
pub mod space;
pub mod suggest;
pub mod text;

pub use corpus::{
    Corpus, Ingest, IngestConfig, Product, RawReview, RecordError, RejectReason, RejectionReport, Review, Sentiment,
    SentimentCounts,
};
pub use embedding::{Embedder, EmbeddingVector, Normalization, PrecomputedEmbedder, SimilarityMatrix, TfIdfEmbedder};
pub use error::{Error, Result};
pub use keywords::KeywordPair;
pub use replay::{ReadingSession, ReplayError, SessionSnapshot};
pub use search::{HighlightSpan, ReviewFilter};
pub use session::{
    Action, Component, EngineConfig, ExplorationMetrics, InteractionEvent, Metric, SessionState, VisitMethod,
    VisitOutcome, VisitRequest, WidgetBreakdown,
};
pub use space::{Catalog, ProductSpace};
pub use suggest::{ModifierPair, ScoreComponent, ScoredCandidate, SuggestParams, SuggestionRecord, SuggestionSet};
