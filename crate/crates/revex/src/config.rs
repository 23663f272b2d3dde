//! Server configuration: a TOML file, overridden by flags and environment.

use std::path::{Path, PathBuf};

use revex_core::embedding::DEFAULT_SIMILARITY_THRESHOLD;
use revex_core::session::DEFAULT_SKEW_THRESHOLD;
use revex_core::suggest::{DissimilarityMode, DEFAULT_SUGGESTION_COUNT};
use revex_core::{Catalog, EngineConfig, IngestConfig, PrecomputedEmbedder, RejectionReport, SuggestParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_corpus, load_vectors, CorpusFormat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub corpus: PathBuf,
    pub corpus_format: Option<CorpusFormat>,
    /// `tfidf` or `precomputed`.
    pub embedder: String,
    /// JSON lines of `{review_id, vector}`, for the precomputed embedder.
    pub vectors: Option<PathBuf>,
    pub store: PathBuf,
    pub listen: String,
    pub similarity_threshold: f64,
    pub skew_threshold: f64,
    pub suggestion_count: usize,
    pub dissimilarity: DissimilarityMode,
    pub ui_origin: Option<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            corpus: PathBuf::from("reviews.jsonl"),
            corpus_format: None,
            embedder: "tfidf".into(),
            vectors: None,
            store: PathBuf::from("sessions"),
            listen: "127.0.0.1:8080".into(),
            similarity_threshold: DEFAULT_SIMILARITY_THRESHOLD,
            skew_threshold: DEFAULT_SKEW_THRESHOLD,
            suggestion_count: DEFAULT_SUGGESTION_COUNT,
            dissimilarity: DissimilarityMode::Farthest,
            ui_origin: None,
        }
    }
}

impl ServerConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            skew_threshold: self.skew_threshold,
            suggest: SuggestParams {
                count: self.suggestion_count,
                dissimilarity: self.dissimilarity,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.similarity_threshold > 0.0 && self.similarity_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "similarity_threshold {} is outside (0, 1]",
                self.similarity_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.skew_threshold) {
            return Err(Error::Config(format!(
                "skew_threshold {} is outside [0, 1)",
                self.skew_threshold
            )));
        }
        if self.suggestion_count == 0 {
            return Err(Error::Config("suggestion_count must be positive".into()));
        }
        Ok(())
    }

    /// Loads the corpus and builds every product's similarity space.
    pub fn load_catalog(&self) -> Result<(Catalog, RejectionReport)> {
        self.validate()?;
        let format = self
            .corpus_format
            .unwrap_or_else(|| CorpusFormat::from_path(&self.corpus));
        let (corpus, report) = load_corpus(&self.corpus, format, IngestConfig::default())?;
        let catalog = match self.embedder.as_str() {
            PrecomputedEmbedder::ID => {
                let path = self
                    .vectors
                    .as_ref()
                    .ok_or_else(|| Error::Config("precomputed embedder needs vectors".into()))?;
                let embedder = PrecomputedEmbedder::new(load_vectors(path)?);
                Catalog::build(&corpus, &embedder, self.similarity_threshold)?
            }
            id => {
                let embedder = revex_core::embedding::embedder_by_id(id)?;
                Catalog::build(&corpus, embedder.as_ref(), self.similarity_threshold)?
            }
        };
        Ok((catalog, report))
    }
}
