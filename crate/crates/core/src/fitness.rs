//! Resource aggregation and the fitness function.
//!
//! Every distinct retrieved location becomes a [`Resource`] weighted by
//! `w = f5·p_score + f6·r_score + f7·s`, where `p_score = (f1 + 1 − p̄) / f1`
//! rewards good mean positions, `r_score = r / N` rewards recurrence across the
//! population's `N` queries, and `s` is the similarity to the search pattern.
//! Query fitness aggregates the `w` of a query's resources; population fitness
//! aggregates query fitness.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::config::{AggregationMode, Config};
use crate::lexicon::Lexicon;
use crate::search::SearchHit;
use crate::similarity::PatternScorer;

#[derive(Debug, Error, PartialEq)]
pub enum FitnessError {
    #[error("rank {rank} outside the result window 1..={window}")]
    RankOutOfWindow { rank: usize, window: usize },
    #[error("occurrence count {r} outside 1..={n}")]
    OccurrenceOutOfRange { r: usize, n: usize },
    #[error("resource has no appearances")]
    NoAppearances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Appearance {
    pub query_index: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FitnessAttrs {
    pub p_bar: f64,
    pub p_score: f64,
    pub r: usize,
    pub r_score: f64,
    pub s: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub location: String,
    pub title: String,
    pub snippet: String,
    /// Lemmatized `title + " " + snippet`.
    pub true_content: Vec<String>,
    /// Sorted by query index, one entry per query.
    pub appearances: Vec<Appearance>,
    pub fitness: FitnessAttrs,
}

impl Resource {
    pub fn appears_in(&self, query_index: usize) -> bool {
        self.appearances
            .binary_search_by_key(&query_index, |a| a.query_index)
            .is_ok()
    }
}

/// One resource per distinct location, in order of first encounter.
///
/// Repeated locations within one result list keep only their best rank.
pub fn aggregate_resources(results: &[Vec<SearchHit>], lexicon: &Lexicon) -> Vec<Resource> {
    let mut resources: Vec<Resource> = Vec::new();
    let mut by_location: HashMap<String, usize> = HashMap::new();
    for (query_index, hits) in results.iter().enumerate() {
        for hit in hits {
            let idx = *by_location.entry(hit.location.clone()).or_insert_with(|| {
                resources.push(Resource {
                    location: hit.location.clone(),
                    title: hit.title.clone(),
                    snippet: hit.snippet.clone(),
                    true_content: lexicon.lemmatize_text(&format!("{} {}", hit.title, hit.snippet)),
                    appearances: Vec::new(),
                    fitness: FitnessAttrs::default(),
                });
                resources.len() - 1
            });
            let appearances = &mut resources[idx].appearances;
            match appearances.last_mut() {
                Some(last) if last.query_index == query_index => {
                    last.rank = last.rank.min(hit.rank);
                }
                _ => appearances.push(Appearance {
                    query_index,
                    rank: hit.rank,
                }),
            }
        }
    }
    resources
}

/// Mean rank over the lists containing the document, and its normalized score.
pub fn position_score(
    appearances: &[Appearance],
    window: usize,
) -> Result<(f64, f64), FitnessError> {
    if appearances.is_empty() {
        return Err(FitnessError::NoAppearances);
    }
    if let Some(a) = appearances.iter().find(|a| a.rank == 0 || a.rank > window) {
        return Err(FitnessError::RankOutOfWindow {
            rank: a.rank,
            window,
        });
    }
    let p_bar = appearances.iter().map(|a| a.rank as f64).sum::<f64>() / appearances.len() as f64;
    let p_score = (window as f64 + 1.0 - p_bar) / window as f64;
    Ok((p_bar, p_score))
}

pub fn occurrence_score(r: usize, n: usize) -> Result<f64, FitnessError> {
    if r == 0 || r > n {
        return Err(FitnessError::OccurrenceOutOfRange { r, n });
    }
    Ok(r as f64 / n as f64)
}

pub fn resource_weight(p_score: f64, r_score: f64, s: f64, config: &Config) -> f64 {
    config.weight_position * p_score
        + config.weight_recurrence * r_score
        + config.weight_similarity * s
}

/// Grouping key for same-host damping: the URI authority, or the top-level
/// directory of a relative corpus path. Files at the corpus root have no host.
pub fn host_of(location: &str) -> Option<String> {
    if let Ok(url) = Url::parse(location) {
        if let Some(host) = url.host_str() {
            return Some(match url.port() {
                Some(port) => format!("{host}:{port}"),
                None => host.to_owned(),
            });
        }
        return None;
    }
    location
        .split_once('/')
        .map(|(top, _)| top.to_owned())
        .filter(|top| !top.is_empty())
}

fn by_weight_desc(a: &Resource, b: &Resource) -> Ordering {
    b.fitness
        .w
        .partial_cmp(&a.fitness.w)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.location.cmp(&b.location))
}

/// Damps the j-th best resource of each host by `coeff^(j-1)` and re-sorts by weight.
pub fn same_host_adjust(mut resources: Vec<Resource>, coeff: f64) -> Vec<Resource> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, res) in resources.iter().enumerate() {
        if let Some(host) = host_of(&res.location) {
            groups.entry(host).or_default().push(i);
        }
    }
    for members in groups.values_mut() {
        members.sort_by(|&a, &b| by_weight_desc(&resources[a], &resources[b]));
        let mut factor = 1.0;
        for &i in members.iter() {
            resources[i].fitness.w *= factor;
            factor *= coeff;
        }
    }
    resources.sort_by(by_weight_desc);
    resources
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

fn aggregate(values: &[f64], mode: AggregationMode) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    match mode {
        AggregationMode::Mean => mean(values),
        AggregationMode::Median => median(values),
    }
}

/// Aggregated weight of a query's resources; 0 for a query that retrieved nothing.
pub fn query_fitness(weights: &[f64], mode: AggregationMode) -> f64 {
    aggregate(weights, mode)
}

pub fn population_fitness(query_fitnesses: &[f64], mode: AggregationMode) -> f64 {
    aggregate(query_fitnesses, mode)
}

/// Population standard deviation (divisor N).
pub fn sigma_fitness(query_fitnesses: &[f64]) -> f64 {
    let Some(&first) = query_fitnesses.first() else {
        return 0.0;
    };
    if query_fitnesses.iter().all(|&f| f == first) {
        return 0.0;
    }
    let m = mean(query_fitnesses);
    let var = query_fitnesses
        .iter()
        .map(|f| (f - m) * (f - m))
        .sum::<f64>()
        / query_fitnesses.len() as f64;
    var.sqrt()
}

/// Scored resources of one population and the fitness of each of its queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Sorted by adjusted weight, best first, truncated to `f2`.
    pub resources: Vec<Resource>,
    pub query_fitness: Vec<f64>,
}

/// Aggregates the result lists of `N = results.len()` queries and computes every
/// fitness attribute. `pattern` is the lemmatized search pattern.
///
/// Query fitness is computed over all of a query's resources before the `f2`
/// retention cap is applied.
pub fn evaluate_results<S: AsRef<str>>(
    results: &[Vec<SearchHit>],
    lexicon: &Lexicon,
    pattern: &[S],
    config: &Config,
) -> Result<Evaluation, FitnessError> {
    let n = results.len();
    let mut resources = aggregate_resources(results, lexicon);
    let contents: Vec<&[String]> = resources
        .iter()
        .map(|r| r.true_content.as_slice())
        .collect();
    let scorer = PatternScorer::new(pattern, &contents);
    for res in &mut resources {
        let (p_bar, p_score) = position_score(&res.appearances, config.results_per_query)?;
        let r = res.appearances.len();
        let r_score = occurrence_score(r, n)?;
        let s = scorer.score(&res.true_content);
        res.fitness = FitnessAttrs {
            p_bar,
            p_score,
            r,
            r_score,
            s,
            w: resource_weight(p_score, r_score, s, config),
        };
    }
    let resources = same_host_adjust(resources, config.same_host_coeff);

    let mut per_query: Vec<Vec<f64>> = vec![Vec::new(); n];
    for res in &resources {
        for a in &res.appearances {
            per_query[a.query_index].push(res.fitness.w);
        }
    }
    let query_fitness = per_query
        .iter()
        .map(|ws| query_fitness(ws, config.aggregation_mode))
        .collect();

    let mut resources = resources;
    resources.truncate(config.max_results_per_population);
    Ok(Evaluation {
        resources,
        query_fitness,
    })
}
