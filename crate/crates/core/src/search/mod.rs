//! Query execution over pluggable engines.
//!
//! Every engine returns the same [`SearchHit`] records: location, title,
//! snippet, engine id and a contiguous 1-based rank.

mod http;
mod local;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, EngineKind};
use crate::lexicon::Lexicon;

pub use http::{HttpEngine, DEFAULT_ATTEMPTS, DEFAULT_BACKOFF};
pub use local::{index_corpus, rank_local, IndexedDoc, LocalEngine, LocalIndex, SNIPPET_CHARS};

/// One entry of a ranked result list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub location: String,
    pub title: String,
    pub snippet: String,
    pub engine: String,
    pub rank: usize,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("transport failure for query '{query}': {message}")]
    Transport { query: String, message: String },
    #[error("malformed engine response for query '{query}': {message}")]
    Malformed { query: String, message: String },
    #[error("result limit must be at least 1")]
    InvalidLimit,
    #[error("cannot read corpus: {0}")]
    Corpus(String),
    #[error("engine not configured: {0}")]
    NotConfigured(String),
}

impl SearchError {
    /// Transport failures may succeed on a later call; everything else will not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, SearchError::Transport { .. })
    }
}

pub trait SearchEngine: Send + Sync {
    fn id(&self) -> &str;

    /// At most `limit` hits ranked `1..=k` in engine order.
    fn execute(&self, query_text: &str, limit: usize) -> Result<Vec<SearchHit>, SearchError>;
}

/// Runs a query on an engine. Free-function form of [`SearchEngine::execute`].
pub fn execute(
    query_text: &str,
    engine: &dyn SearchEngine,
    limit: usize,
) -> Result<Vec<SearchHit>, SearchError> {
    if limit == 0 {
        return Err(SearchError::InvalidLimit);
    }
    engine.execute(query_text, limit)
}

/// Builds the engine selected by `g1`, using the corpus directory or adapter URL from the config.
pub fn engine_from_config(
    config: &Config,
    lexicon: &Lexicon,
) -> Result<Box<dyn SearchEngine>, SearchError> {
    match config.engine_kind {
        EngineKind::Local => {
            let dir = config.corpus_dir.as_ref().ok_or_else(|| {
                SearchError::NotConfigured("local engine needs a corpus directory".into())
            })?;
            let index = index_corpus(dir, lexicon)?;
            Ok(Box::new(LocalEngine::new(index, lexicon.clone())))
        }
        EngineKind::HttpAdapter => {
            let url = config.adapter_url.as_ref().ok_or_else(|| {
                SearchError::NotConfigured("HTTP adapter needs a base URL".into())
            })?;
            Ok(Box::new(HttpEngine::new(url)?))
        }
    }
}
