//! The evolutionary loop over populations of keyword queries.
//!
//! A [`Query`] is a chromosome whose genes are keyword concepts. Each
//! generation runs select → pair → cross over → mutate → join, and the joined
//! parents and offspring compete for the next population's slots.

mod operators;
mod run;

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Config;
use crate::fitness::{FitnessError, Resource};
use crate::search::{SearchError, SearchHit};

pub use operators::{
    create_initial_population, crossover, crossover_at, genotype_distance, mutate,
    parent_pair_indices, random_query, select_best, select_parent_pairs,
};
pub use run::{
    advance, evaluate, merge_resources, next_generation, pattern_of, run, should_stop, start, step,
    JoinOutcome,
};

/// The generator behind every random draw of a run.
pub type RunRng = ChaCha8Rng;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("keyword pool has {pool} concepts but queries need {genes}")]
    PoolTooSmall { pool: usize, genes: usize },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

/// A keyword concept: its lemma key identifies it, its surface text is sent to engines.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Gene {
    pub lemma_key: String,
    pub surface: String,
}

impl Gene {
    pub fn new(lemma_key: impl Into<String>, surface: impl Into<String>) -> Self {
        Self {
            lemma_key: lemma_key.into(),
            surface: surface.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub genes: Vec<Gene>,
    pub query_text: String,
    pub results: Vec<SearchHit>,
    pub fitness: f64,
}

impl Query {
    pub fn new(genes: Vec<Gene>) -> Self {
        let query_text = Self::text_of(&genes);
        Self {
            genes,
            query_text,
            results: Vec::new(),
            fitness: 0.0,
        }
    }

    pub fn text_of(genes: &[Gene]) -> String {
        genes
            .iter()
            .map(|g| g.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Order-insensitive identity used for duplicate detection.
    pub fn key_set(&self) -> BTreeSet<&str> {
        self.genes.iter().map(|g| g.lemma_key.as_str()).collect()
    }

    pub fn has_lemma(&self, lemma_key: &str) -> bool {
        self.genes.iter().any(|g| g.lemma_key == lemma_key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub generation_number: u32,
    pub queries: Vec<Query>,
    pub resources: Vec<Resource>,
    pub fitness: f64,
    pub sigma_fitness: f64,
}

impl Population {
    pub fn new(generation_number: u32, queries: Vec<Query>) -> Self {
        Self {
            generation_number,
            queries,
            resources: Vec::new(),
            fitness: 0.0,
            sigma_fitness: 0.0,
        }
    }

    pub fn query_fitnesses(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.fitness).collect()
    }

    /// First query with the highest fitness.
    pub fn best_query(&self) -> Option<&Query> {
        self.queries
            .iter()
            .fold(None, |best: Option<&Query>, q| match best {
                Some(b) if b.fitness >= q.fitness => Some(b),
                _ => Some(q),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation_number: u32,
    pub fitness: f64,
    pub sigma_fitness: f64,
    pub best_query_text: String,
    /// Offspring mutated while producing this generation.
    pub mutations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Running,
    Stability,
    GenerationTarget,
    HardCap,
    Error(String),
}

impl StopReason {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, StopReason::Running | StopReason::Error(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            StopReason::Running => "Running",
            StopReason::Stability => "Stability",
            StopReason::GenerationTarget => "GenerationTarget",
            StopReason::HardCap => "HardCap",
            StopReason::Error(_) => "Error",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Error(msg) => write!(f, "Error: {msg}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Everything needed to continue a run exactly where it left off.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub config: Config,
    pub keyword_pool: Vec<Gene>,
    /// Genes introduced by synonym substitution, sorted.
    pub generated_keywords: Vec<Gene>,
    pub init_population: Population,
    pub current_population: Population,
    pub history: Vec<GenerationSummary>,
    /// Best version of every resource seen so far, capped at `f3`.
    pub all_resources: Vec<Resource>,
    pub stop_reason: StopReason,
    pub rng: RunRng,
}

impl RunState {
    pub fn seeded_rng(seed: u64) -> RunRng {
        RunRng::seed_from_u64(seed)
    }

    /// The initial population has been evaluated at least once.
    pub fn is_initialized(&self) -> bool {
        !self.history.is_empty()
    }

    /// Top `k` resources of the whole run, best first.
    pub fn top_resources(&self, k: usize) -> &[Resource] {
        &self.all_resources[..k.min(self.all_resources.len())]
    }
}

/// Serialized generator position: the seed, stream and word offset of the ChaCha8 stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    /// 32-byte seed, lowercase hex.
    pub seed: String,
    pub stream: u64,
    /// Word position as a decimal string (128-bit).
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &RunRng) -> Self {
        Self {
            seed: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<RunRng, String> {
        if self.seed.len() != 64 || !self.seed.is_ascii() {
            return Err(format!("seed must be 64 hex digits, got '{}'", self.seed));
        }
        let mut seed = [0u8; 32];
        for (i, byte) in seed.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&self.seed[2 * i..2 * i + 2], 16)
                .map_err(|e| format!("bad seed hex: {e}"))?;
        }
        let word_pos: u128 = self
            .word_pos
            .parse()
            .map_err(|e| format!("bad word position '{}': {e}", self.word_pos))?;
        let mut rng = RunRng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(word_pos);
        Ok(rng)
    }
}
