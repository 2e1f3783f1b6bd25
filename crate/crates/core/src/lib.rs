//! Evolutionary optimization of keyword search queries for subject search.
//!
//! A population of keyword queries is executed against a search engine; every
//! retrieved document is weighted by its rank position, its recurrence across
//! queries and its TF-IDF similarity to the keyword pattern. Queries are then
//! selected, paired for diversity, recombined with synonym substitution,
//! mutated and joined with their parents for elitist survival until the
//! population stabilizes or a generation limit is reached.

pub mod config;
pub mod evolve;
pub mod fitness;
pub mod lexicon;
pub mod persistence;
pub mod search;
pub mod similarity;

pub use config::{default_config, load_config, validate, Config};
pub use evolve::{run, Gene, Population, Query, RunState, StopReason};
pub use fitness::Resource;
pub use lexicon::Lexicon;
pub use search::{SearchEngine, SearchHit};
