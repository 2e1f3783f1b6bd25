//! Algorithm parameters, their validation, and the flat `key = value` file format.
//!
//! Keys follow the parameter catalog of the algorithm: `g1`..`g4` (general),
//! `f1`..`f8` (fitness), `c1` (crossover), `m1` (mutation) and `e1`..`e3`
//! (termination), plus a handful of artifact keys (seed, autosave, engine
//! source and dictionary paths).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which search backend executes queries (`g1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineKind {
    Local,
    HttpAdapter,
}

/// How per-resource weights are folded into query and population fitness (`f8`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationMode {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossoverType {
    OnePoint,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// g1
    pub engine_kind: EngineKind,
    /// g2, number of queries per population.
    pub population_size: usize,
    /// g3, keywords per query.
    pub genes_per_query: usize,
    /// g4, file holding the initial keyword pool.
    pub keyword_pool_path: PathBuf,
    /// f1, result-list depth requested per query.
    pub results_per_query: usize,
    /// f2, cap on aggregated resources kept per population.
    pub max_results_per_population: usize,
    /// f3, cap on resources kept across all populations.
    pub max_results_total: usize,
    /// f4, damping coefficient for additional documents on the same host.
    pub same_host_coeff: f64,
    /// f5
    pub weight_position: f64,
    /// f6
    pub weight_recurrence: f64,
    /// f7
    pub weight_similarity: f64,
    /// f8
    pub aggregation_mode: AggregationMode,
    /// c1, multiplier on mean fitness giving the parent eligibility threshold.
    pub parent_criterion_mult: f64,
    /// m1, probability that a query is mutated.
    pub mutation_prob: f64,
    /// Per-gene probability of substituting a synonym during crossover.
    pub synonym_swap_prob: f64,
    /// e1, normal-stop generation count.
    pub target_generations: u32,
    /// e2, fitness standard deviation at or below which the population is stable.
    pub sigma_threshold: f64,
    /// e3, absolute generation cap.
    pub max_generations_cap: u32,
    pub crossover_type: CrossoverType,
    pub rng_seed: u64,
    pub autosave: bool,
    pub state_path: Option<PathBuf>,
    /// Corpus directory for the local engine.
    pub corpus_dir: Option<PathBuf>,
    /// Base URL for the HTTP adapter engine.
    pub adapter_url: Option<String>,
    pub lemma_dict: Option<PathBuf>,
    pub synonym_dict: Option<PathBuf>,
    pub stopword_list: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            engine_kind: EngineKind::Local,
            population_size: 8,
            genes_per_query: 3,
            keyword_pool_path: PathBuf::from("keywords.txt"),
            results_per_query: 10,
            max_results_per_population: 200,
            max_results_total: 1000,
            same_host_coeff: 0.8,
            weight_position: 1.0 / 3.0,
            weight_recurrence: 1.0 / 3.0,
            weight_similarity: 1.0 / 3.0,
            aggregation_mode: AggregationMode::Mean,
            parent_criterion_mult: 1.0,
            mutation_prob: 0.1,
            synonym_swap_prob: 0.2,
            target_generations: 10,
            sigma_threshold: 0.01,
            max_generations_cap: 50,
            crossover_type: CrossoverType::OnePoint,
            rng_seed: 42,
            autosave: false,
            state_path: None,
            corpus_dir: None,
            adapter_url: None,
            lemma_dict: None,
            synonym_dict: None,
            stopword_list: None,
        }
    }
}

pub fn default_config() -> Config {
    Config::default()
}

/// A single violated parameter constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("population_size ≥ 2 (got {0})")]
    PopulationTooSmall(usize),
    #[error("genes_per_query ≥ 1 (got {0})")]
    NoGenes(usize),
    #[error("genes_per_query ≥ 2 for one-point crossover (got {0})")]
    NoCutPoint(usize),
    #[error("{name} must be positive")]
    NotPositive { name: &'static str },
    #[error("e1 ≤ e3 (target_generations {target} > max_generations_cap {cap})")]
    TargetExceedsCap { target: u32, cap: u32 },
    #[error("same_host_coeff out of (0,1] (got {0})")]
    SameHostOutOfRange(f64),
    #[error("{name} must be a finite value ≥ 0 (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("fitness weights must have a positive sum")]
    ZeroWeights,
    #[error("parent_criterion_mult must be > 0 (got {0})")]
    CriterionNotPositive(f64),
    #[error("{name} out of [0,1] (got {value})")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
}

/// Every violation found by [`validate`], in field order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("invalid config: {0}")]
    Invalid(#[from] ValidationErrors),
}

/// Checks every invariant and returns the config unchanged, or all violations at once.
pub fn validate(config: Config) -> Result<Config, ValidationErrors> {
    let mut errs = Vec::new();
    let c = &config;

    if c.population_size < 2 {
        errs.push(ValidationError::PopulationTooSmall(c.population_size));
    }
    if c.genes_per_query < 1 {
        errs.push(ValidationError::NoGenes(c.genes_per_query));
    } else if c.genes_per_query < 2 && c.crossover_type == CrossoverType::OnePoint {
        errs.push(ValidationError::NoCutPoint(c.genes_per_query));
    }
    for (name, v) in [
        ("results_per_query", c.results_per_query),
        ("max_results_per_population", c.max_results_per_population),
        ("max_results_total", c.max_results_total),
    ] {
        if v == 0 {
            errs.push(ValidationError::NotPositive { name });
        }
    }
    if c.max_generations_cap == 0 {
        errs.push(ValidationError::NotPositive {
            name: "max_generations_cap",
        });
    }
    if c.target_generations > c.max_generations_cap {
        errs.push(ValidationError::TargetExceedsCap {
            target: c.target_generations,
            cap: c.max_generations_cap,
        });
    }
    if !(c.same_host_coeff > 0.0 && c.same_host_coeff <= 1.0) {
        errs.push(ValidationError::SameHostOutOfRange(c.same_host_coeff));
    }
    let weights = [
        ("weight_position", c.weight_position),
        ("weight_recurrence", c.weight_recurrence),
        ("weight_similarity", c.weight_similarity),
    ];
    let mut weights_ok = true;
    for (name, value) in weights {
        if !(value.is_finite() && value >= 0.0) {
            errs.push(ValidationError::Negative { name, value });
            weights_ok = false;
        }
    }
    if weights_ok && weights.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
        errs.push(ValidationError::ZeroWeights);
    }
    if !(c.parent_criterion_mult.is_finite() && c.parent_criterion_mult > 0.0) {
        errs.push(ValidationError::CriterionNotPositive(
            c.parent_criterion_mult,
        ));
    }
    for (name, value) in [
        ("mutation_prob", c.mutation_prob),
        ("synonym_swap_prob", c.synonym_swap_prob),
    ] {
        if !(0.0..=1.0).contains(&value) {
            errs.push(ValidationError::ProbabilityOutOfRange { name, value });
        }
    }
    if !(c.sigma_threshold.is_finite() && c.sigma_threshold >= 0.0) {
        errs.push(ValidationError::Negative {
            name: "sigma_threshold",
            value: c.sigma_threshold,
        });
    }

    if errs.is_empty() {
        Ok(config)
    } else {
        Err(ValidationErrors(errs))
    }
}

/// Reads a config file and validates it. Keys not present keep their defaults.
pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse_config(&text)?;
    Ok(validate(config)?)
}

/// Parses config text without validating it.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut config = Config::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected 'key = value', found '{line}'"),
        })?;
        config.set(key.trim(), value.trim(), line_no)?;
    }
    Ok(config)
}

fn strip_comment(line: &str) -> &str {
    if line.trim_start().starts_with('#') {
        return "";
    }
    // Inline comments must be preceded by whitespace so URL fragments survive.
    let bytes = line.as_bytes();
    for i in 1..bytes.len() {
        if bytes[i] == b'#' && bytes[i - 1].is_ascii_whitespace() {
            return &line[..i];
        }
    }
    line
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("invalid value '{value}' for {key}"),
    })
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Parse {
            line,
            message: format!("invalid boolean '{value}' for {key}"),
        }),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl Config {
    /// Assigns one `key = value` pair. Used by both the file parser and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        match key {
            "g1" => {
                self.engine_kind = match value.to_ascii_lowercase().as_str() {
                    "local" => EngineKind::Local,
                    "http" | "httpadapter" | "http_adapter" => EngineKind::HttpAdapter,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("invalid engine '{value}' for g1 (local|http)"),
                        })
                    }
                }
            }
            "g2" => self.population_size = parse_value(key, value, line)?,
            "g3" => self.genes_per_query = parse_value(key, value, line)?,
            "g4" => self.keyword_pool_path = PathBuf::from(value),
            "f1" => self.results_per_query = parse_value(key, value, line)?,
            "f2" => self.max_results_per_population = parse_value(key, value, line)?,
            "f3" => self.max_results_total = parse_value(key, value, line)?,
            "f4" => self.same_host_coeff = parse_value(key, value, line)?,
            "f5" => self.weight_position = parse_value(key, value, line)?,
            "f6" => self.weight_recurrence = parse_value(key, value, line)?,
            "f7" => self.weight_similarity = parse_value(key, value, line)?,
            "f8" => {
                self.aggregation_mode = match value.to_ascii_lowercase().as_str() {
                    "mean" => AggregationMode::Mean,
                    "median" => AggregationMode::Median,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("invalid aggregation '{value}' for f8 (mean|median)"),
                        })
                    }
                }
            }
            "c1" => self.parent_criterion_mult = parse_value(key, value, line)?,
            "m1" => self.mutation_prob = parse_value(key, value, line)?,
            "synonym_swap_prob" => self.synonym_swap_prob = parse_value(key, value, line)?,
            "e1" => self.target_generations = parse_value(key, value, line)?,
            "e2" => self.sigma_threshold = parse_value(key, value, line)?,
            "e3" => self.max_generations_cap = parse_value(key, value, line)?,
            "crossover_type" => {
                self.crossover_type = match value.to_ascii_lowercase().as_str() {
                    "onepoint" | "one_point" | "one-point" => CrossoverType::OnePoint,
                    "discrete" => CrossoverType::Discrete,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!(
                                "invalid crossover_type '{value}' (one_point|discrete)"
                            ),
                        })
                    }
                }
            }
            "rng_seed" => self.rng_seed = parse_value(key, value, line)?,
            "autosave" => self.autosave = parse_bool(key, value, line)?,
            "state_path" => self.state_path = optional_path(value),
            "corpus" => self.corpus_dir = optional_path(value),
            "adapter_url" => self.adapter_url = (!value.is_empty()).then(|| value.to_string()),
            "lemma_dict" => self.lemma_dict = optional_path(value),
            "synonym_dict" => self.synonym_dict = optional_path(value),
            "stopword_list" => self.stopword_list = optional_path(value),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Renders the config in the file format read by [`load_config`].
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put(
            "g1",
            match self.engine_kind {
                EngineKind::Local => "local",
                EngineKind::HttpAdapter => "http",
            }
            .into(),
        );
        put("g2", self.population_size.to_string());
        put("g3", self.genes_per_query.to_string());
        put("g4", self.keyword_pool_path.display().to_string());
        put("f1", self.results_per_query.to_string());
        put("f2", self.max_results_per_population.to_string());
        put("f3", self.max_results_total.to_string());
        put("f4", self.same_host_coeff.to_string());
        put("f5", self.weight_position.to_string());
        put("f6", self.weight_recurrence.to_string());
        put("f7", self.weight_similarity.to_string());
        put(
            "f8",
            match self.aggregation_mode {
                AggregationMode::Mean => "mean",
                AggregationMode::Median => "median",
            }
            .into(),
        );
        put("c1", self.parent_criterion_mult.to_string());
        put("m1", self.mutation_prob.to_string());
        put("synonym_swap_prob", self.synonym_swap_prob.to_string());
        put("e1", self.target_generations.to_string());
        put("e2", self.sigma_threshold.to_string());
        put("e3", self.max_generations_cap.to_string());
        put(
            "crossover_type",
            match self.crossover_type {
                CrossoverType::OnePoint => "one_point",
                CrossoverType::Discrete => "discrete",
            }
            .into(),
        );
        put("rng_seed", self.rng_seed.to_string());
        put("autosave", self.autosave.to_string());
        let opt_paths = [
            ("state_path", &self.state_path),
            ("corpus", &self.corpus_dir),
        ];
        for (k, p) in opt_paths {
            if let Some(p) = p {
                put(k, p.display().to_string());
            }
        }
        if let Some(url) = &self.adapter_url {
            put("adapter_url", url.clone());
        }
        for (k, p) in [
            ("lemma_dict", &self.lemma_dict),
            ("synonym_dict", &self.synonym_dict),
            ("stopword_list", &self.stopword_list),
        ] {
            if let Some(p) = p {
                put(k, p.display().to_string());
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_file_string())
    }

    /// Makes every relative file path absolute against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.keyword_pool_path);
        for p in [
            &mut self.state_path,
            &mut self.corpus_dir,
            &mut self.lemma_dict,
            &mut self.synonym_dict,
            &mut self.stopword_list,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }
}
