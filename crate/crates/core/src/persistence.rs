//! Run-state files and keyword pool loading.
//!
//! A state file (`.gaf`) is a JSON document with a single root object `GAF`
//! whose sections are `FormatVersion`, `ErrorText`, `KeyWords`,
//! `AllKeyWordsSeen`, `Populations`, `Options`, `InitPopulation`,
//! `CurrentPopulation`, `StopReason`, `RngState` and `AllResources`.
//! Output is a deterministic function of the state.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::config::{validate, Config};
use crate::evolve::{Gene, GenerationSummary, Population, Query, RngState, RunState, StopReason};
use crate::fitness::{population_fitness, sigma_fitness};
use crate::lexicon::Lexicon;

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance for checking stored aggregates against their recomputation.
const CONSISTENCY_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot parse state: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unsupported state format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("invalid state: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{path}:{line}: {message}")]
    Pool {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    #[serde(rename = "GAF")]
    gaf: StateDocument,
}

/// Serialized form of a [`RunState`].
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    #[serde(rename = "FormatVersion")]
    format_version: u32,
    #[serde(rename = "ErrorText")]
    error_text: String,
    #[serde(rename = "KeyWords")]
    keywords: Vec<Gene>,
    #[serde(rename = "AllKeyWordsSeen")]
    generated_keywords: Vec<Gene>,
    #[serde(rename = "Populations")]
    populations: Vec<GenerationSummary>,
    #[serde(rename = "Options")]
    options: Config,
    #[serde(rename = "InitPopulation")]
    init_population: Population,
    #[serde(rename = "CurrentPopulation")]
    current_population: Population,
    #[serde(rename = "StopReason")]
    stop_reason: String,
    #[serde(rename = "RngState")]
    rng_state: RngState,
    #[serde(rename = "AllResources")]
    all_resources: Vec<Resource>,
}

use crate::fitness::Resource;

impl StateDocument {
    fn from_state(state: &RunState) -> Self {
        let error_text = match &state.stop_reason {
            StopReason::Error(msg) => msg.clone(),
            _ => String::new(),
        };
        Self {
            format_version: FORMAT_VERSION,
            error_text,
            keywords: state.keyword_pool.clone(),
            generated_keywords: state.generated_keywords.clone(),
            populations: state.history.clone(),
            options: state.config.clone(),
            init_population: state.init_population.clone(),
            current_population: state.current_population.clone(),
            stop_reason: state.stop_reason.name().to_owned(),
            rng_state: RngState::capture(&state.rng),
            all_resources: state.all_resources.clone(),
        }
    }

    fn into_state(self) -> Result<RunState, PersistenceError> {
        if self.format_version != FORMAT_VERSION {
            return Err(PersistenceError::Version {
                found: self.format_version,
            });
        }
        let mut errors = Vec::new();
        let stop_reason = match self.stop_reason.as_str() {
            "Running" => StopReason::Running,
            "Stability" => StopReason::Stability,
            "GenerationTarget" => StopReason::GenerationTarget,
            "HardCap" => StopReason::HardCap,
            "Error" => StopReason::Error(self.error_text.clone()),
            other => {
                errors.push(format!("GAF.StopReason: unknown value '{other}'"));
                StopReason::Running
            }
        };
        let rng = match self.rng_state.restore() {
            Ok(rng) => Some(rng),
            Err(e) => {
                errors.push(format!("GAF.RngState: {e}"));
                None
            }
        };
        if !errors.is_empty() {
            return Err(PersistenceError::Invalid(errors));
        }
        let state = RunState {
            config: self.options,
            keyword_pool: self.keywords,
            generated_keywords: self.generated_keywords,
            init_population: self.init_population,
            current_population: self.current_population,
            history: self.populations,
            all_resources: self.all_resources,
            stop_reason,
            rng: rng.expect("checked above"),
        };
        let problems = check_state(&state);
        if problems.is_empty() {
            Ok(state)
        } else {
            Err(PersistenceError::Invalid(problems))
        }
    }
}

/// Renders the state document text.
pub fn state_to_string(state: &RunState) -> String {
    let file = StateFile {
        gaf: StateDocument::from_state(state),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("state is serializable");
    text.push('\n');
    text
}

/// Parses state document text and checks every invariant.
pub fn state_from_str(text: &str, origin: &Path) -> Result<RunState, PersistenceError> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| PersistenceError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    file.gaf.into_state()
}

/// Writes the state through a temporary file renamed over `path`.
pub fn save_state(state: &RunState, path: &Path) -> Result<(), PersistenceError> {
    let io_err = |source| PersistenceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(state_to_string(state).as_bytes())
        .map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn load_state(path: &Path) -> Result<RunState, PersistenceError> {
    let text = fs::read_to_string(path).map_err(|source| PersistenceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    state_from_str(&text, path)
}

fn check_population(
    at: &str,
    pop: &Population,
    config: &Config,
    evaluated: bool,
    problems: &mut Vec<String>,
) {
    if pop.queries.len() != config.population_size {
        problems.push(format!(
            "{at}.queries: expected {} queries, found {}",
            config.population_size,
            pop.queries.len()
        ));
    }
    for (i, q) in pop.queries.iter().enumerate() {
        check_query(&format!("{at}.queries[{i}]"), q, config, problems);
    }
    if !evaluated {
        return;
    }
    let fs = pop.query_fitnesses();
    if (population_fitness(&fs, config.aggregation_mode) - pop.fitness).abs() > CONSISTENCY_EPS {
        problems.push(format!(
            "{at}.fitness: inconsistent with query fitness values"
        ));
    }
    if (sigma_fitness(&fs) - pop.sigma_fitness).abs() > CONSISTENCY_EPS {
        problems.push(format!(
            "{at}.sigma_fitness: inconsistent with query fitness values"
        ));
    }
    let n = pop.queries.len();
    for (i, res) in pop.resources.iter().enumerate() {
        let path = format!("{at}.resources[{i}]");
        if res.location.is_empty() {
            problems.push(format!("{path}.location: empty"));
        }
        if res.appearances.is_empty() {
            problems.push(format!("{path}.appearances: empty"));
        }
        let distinct: BTreeSet<usize> = res.appearances.iter().map(|a| a.query_index).collect();
        if distinct.len() != res.appearances.len() {
            problems.push(format!("{path}.appearances: repeated query index"));
        }
        if res.appearances.iter().any(|a| a.query_index >= n) {
            problems.push(format!("{path}.appearances: query index out of range"));
        }
        if res
            .appearances
            .iter()
            .any(|a| a.rank == 0 || a.rank > config.results_per_query)
        {
            problems.push(format!(
                "{path}.appearances: rank outside 1..={}",
                config.results_per_query
            ));
        }
        if res.fitness.r != res.appearances.len() || res.fitness.r > n {
            problems.push(format!("{path}.fitness.r: inconsistent occurrence count"));
        }
    }
    if pop.resources.len() > config.max_results_per_population {
        problems.push(format!("{at}.resources: more than f2 entries"));
    }
}

fn check_query(at: &str, q: &Query, config: &Config, problems: &mut Vec<String>) {
    if q.genes.len() != config.genes_per_query {
        problems.push(format!(
            "{at}.genes: expected {} genes, found {}",
            config.genes_per_query,
            q.genes.len()
        ));
    }
    if q.key_set().len() != q.genes.len() {
        problems.push(format!("{at}.genes: repeated lemma key"));
    }
    if q.query_text != Query::text_of(&q.genes) {
        problems.push(format!("{at}.query_text: does not match genes"));
    }
}

/// Invariant violations of a state, each prefixed with its path in the document.
pub fn check_state(state: &RunState) -> Vec<String> {
    let mut problems = Vec::new();
    let config = &state.config;
    if let Err(errs) = validate(config.clone()) {
        problems.extend(errs.0.iter().map(|e| format!("GAF.Options: {e}")));
        return problems;
    }
    let evaluated = state.is_initialized();
    check_population(
        "GAF.InitPopulation",
        &state.init_population,
        config,
        evaluated,
        &mut problems,
    );
    check_population(
        "GAF.CurrentPopulation",
        &state.current_population,
        config,
        evaluated,
        &mut problems,
    );
    for pair in state.history.windows(2) {
        if pair[1].generation_number <= pair[0].generation_number {
            problems.push(format!(
                "GAF.Populations: generation {} follows {}",
                pair[1].generation_number, pair[0].generation_number
            ));
        }
    }
    if let Some(last) = state.history.last() {
        if last.generation_number != state.current_population.generation_number {
            problems.push("GAF.Populations: last entry is not the current population".into());
        }
    }
    if state.all_resources.len() > config.max_results_total {
        problems.push("GAF.AllResources: more than f3 entries".into());
    }
    let pool_keys: BTreeSet<&str> = state
        .keyword_pool
        .iter()
        .map(|g| g.lemma_key.as_str())
        .collect();
    if pool_keys.len() != state.keyword_pool.len() {
        problems.push("GAF.KeyWords: repeated lemma key".into());
    }
    problems
}

/// Reads a keyword pool: one concept per line, `#` comments and blank lines ignored.
/// Concepts whose lemma key repeats an earlier line are dropped.
pub fn load_keyword_pool(path: &Path, lexicon: &Lexicon) -> Result<Vec<Gene>, PersistenceError> {
    let text = fs::read_to_string(path).map_err(|source| PersistenceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut seen = BTreeSet::new();
    let mut pool = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let surface = line.trim();
        if surface.is_empty() || surface.starts_with('#') {
            continue;
        }
        let lemma_key = lexicon.lemmatize_text(surface).join(" ");
        if lemma_key.is_empty() {
            return Err(PersistenceError::Pool {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("'{surface}' has no content words"),
            });
        }
        if seen.insert(lemma_key.clone()) {
            pool.push(Gene::new(lemma_key, surface));
        }
    }
    Ok(pool)
}
