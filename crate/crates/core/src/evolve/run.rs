//! Evaluation, elitist joining, stop rules and the generation loop.

use std::collections::{BTreeMap, BTreeSet};

use log::{info, warn};
use rand::Rng;
use rayon::prelude::*;

use super::operators::{
    create_initial_population, crossover, mutate, random_query, select_best, select_parent_pairs,
};
use super::{
    EvolveError, Gene, GenerationSummary, Population, Query, RunRng, RunState, StopReason,
};
use crate::config::Config;
use crate::fitness::{evaluate_results, population_fitness, sigma_fitness, Resource};
use crate::lexicon::Lexicon;
use crate::persistence;
use crate::search::{execute, SearchEngine, SearchError, SearchHit};

/// Attempts at drawing a random query whose gene set is not already present.
const FRESH_QUERY_ATTEMPTS: usize = 100;

/// The search pattern: lemma keys of the whole keyword pool, split into single lemmas.
pub fn pattern_of(pool: &[Gene]) -> Vec<String> {
    pool.iter()
        .flat_map(|g| g.lemma_key.split(' ').map(str::to_owned))
        .filter(|l| !l.is_empty())
        .collect()
}

/// Runs the listed queries concurrently. Transport failures yield empty lists;
/// the first other failure (by query order) is returned.
fn execute_all(
    queries: &[&Query],
    engine: &dyn SearchEngine,
    limit: usize,
) -> Result<Vec<Vec<SearchHit>>, SearchError> {
    let outcomes: Vec<Result<Vec<SearchHit>, SearchError>> = queries
        .par_iter()
        .map(|q| execute(&q.query_text, engine, limit))
        .collect();
    outcomes
        .into_iter()
        .map(|outcome| match outcome {
            Err(e) if e.is_retryable() => {
                warn!("{e}; continuing with an empty result list");
                Ok(Vec::new())
            }
            other => other,
        })
        .collect()
}

/// Scores queries that already carry their results, as one population.
fn score_population(
    generation_number: u32,
    mut queries: Vec<Query>,
    lexicon: &Lexicon,
    pattern: &[String],
    config: &Config,
) -> Result<Population, EvolveError> {
    let results: Vec<Vec<SearchHit>> = queries.iter().map(|q| q.results.clone()).collect();
    let eval = evaluate_results(&results, lexicon, pattern, config)?;
    for (q, f) in queries.iter_mut().zip(&eval.query_fitness) {
        q.fitness = *f;
    }
    let fitness = population_fitness(&eval.query_fitness, config.aggregation_mode);
    let sigma_fitness = sigma_fitness(&eval.query_fitness);
    Ok(Population {
        generation_number,
        queries,
        resources: eval.resources,
        fitness,
        sigma_fitness,
    })
}

/// Executes every query of the population and computes all fitness values.
pub fn evaluate(
    population: Population,
    engine: &dyn SearchEngine,
    lexicon: &Lexicon,
    config: &Config,
    pattern: &[String],
) -> Result<Population, EvolveError> {
    let refs: Vec<&Query> = population.queries.iter().collect();
    let results = execute_all(&refs, engine, config.results_per_query)?;
    let mut queries = population.queries;
    for (q, hits) in queries.iter_mut().zip(results) {
        q.results = hits;
    }
    score_population(
        population.generation_number,
        queries,
        lexicon,
        pattern,
        config,
    )
}

/// Result of joining parents and offspring.
#[derive(Debug, Clone)]
pub struct JoinOutcome {
    /// The next generation, scored among its own queries.
    pub population: Population,
    /// Deduplicated parents then offspring, with fitness from the joint evaluation.
    pub joined: Vec<Query>,
    /// Positions in `joined` that survived, best first.
    pub survivors: Vec<usize>,
}

/// Elitist survival: parents and children are evaluated together and the top
/// `g2` queries form the next generation.
#[allow(clippy::too_many_arguments)]
pub fn next_generation<R: Rng + ?Sized>(
    parents: &Population,
    children: Vec<Query>,
    engine: &dyn SearchEngine,
    lexicon: &Lexicon,
    config: &Config,
    pool: &[Gene],
    pattern: &[String],
    rng: &mut R,
) -> Result<JoinOutcome, EvolveError> {
    let mut joined: Vec<(Query, bool)> = Vec::new();
    let mut keys: BTreeSet<Vec<String>> = BTreeSet::new();
    let key_of =
        |q: &Query| -> Vec<String> { q.key_set().into_iter().map(str::to_owned).collect() };
    let candidates = parents
        .queries
        .iter()
        .cloned()
        .map(|q| (q, true))
        .chain(children.into_iter().map(|q| (q, false)));
    for (q, executed) in candidates {
        if keys.insert(key_of(&q)) {
            joined.push((q, executed));
        }
    }
    while joined.len() < config.population_size {
        let mut fresh = random_query(pool, config.genes_per_query, rng);
        for _ in 1..FRESH_QUERY_ATTEMPTS {
            if !keys.contains(&key_of(&fresh)) {
                break;
            }
            fresh = random_query(pool, config.genes_per_query, rng);
        }
        keys.insert(key_of(&fresh));
        joined.push((fresh, false));
    }

    let pending: Vec<&Query> = joined
        .iter()
        .filter(|(_, ex)| !ex)
        .map(|(q, _)| q)
        .collect();
    let mut fresh_results = execute_all(&pending, engine, config.results_per_query)?.into_iter();
    let queries: Vec<Query> = joined
        .into_iter()
        .map(|(mut q, executed)| {
            if !executed {
                q.results = fresh_results
                    .next()
                    .expect("one result list per pending query");
            }
            q
        })
        .collect();

    let joint = score_population(parents.generation_number, queries, lexicon, pattern, config)?;
    let mut order: Vec<usize> = (0..joint.queries.len()).collect();
    order.sort_by(|&a, &b| {
        joint.queries[b]
            .fitness
            .total_cmp(&joint.queries[a].fitness)
    });
    order.truncate(config.population_size);

    let survivors: Vec<Query> = order.iter().map(|&i| joint.queries[i].clone()).collect();
    let population = score_population(
        parents.generation_number + 1,
        survivors,
        lexicon,
        pattern,
        config,
    )?;
    Ok(JoinOutcome {
        population,
        joined: joint.queries,
        survivors: order,
    })
}

/// Stop rule checked after each evaluation, in order: stability, target, hard cap.
pub fn should_stop(population: &Population, config: &Config) -> StopReason {
    if population.sigma_fitness <= config.sigma_threshold {
        StopReason::Stability
    } else if population.generation_number >= config.target_generations {
        StopReason::GenerationTarget
    } else if population.generation_number >= config.max_generations_cap {
        StopReason::HardCap
    } else {
        StopReason::Running
    }
}

/// Folds a population's resources into the run-wide pool, keeping the best
/// weight per location, ordered by weight and capped at `cap`.
pub fn merge_resources(all: &mut Vec<Resource>, new: &[Resource], cap: usize) {
    let mut by_location: BTreeMap<String, Resource> =
        all.drain(..).map(|r| (r.location.clone(), r)).collect();
    for res in new {
        match by_location.get(&res.location) {
            Some(existing) if existing.fitness.w >= res.fitness.w => {}
            _ => {
                by_location.insert(res.location.clone(), res.clone());
            }
        }
    }
    let mut merged: Vec<Resource> = by_location.into_values().collect();
    merged.sort_by(|a, b| {
        b.fitness
            .w
            .total_cmp(&a.fitness.w)
            .then_with(|| a.location.cmp(&b.location))
    });
    merged.truncate(cap);
    *all = merged;
}

fn summary(population: &Population, mutations: usize) -> GenerationSummary {
    GenerationSummary {
        generation_number: population.generation_number,
        fitness: population.fitness,
        sigma_fitness: population.sigma_fitness,
        best_query_text: population
            .best_query()
            .map(|q| q.query_text.clone())
            .unwrap_or_default(),
        mutations,
    }
}

fn record(state: &mut RunState, mutations: usize) {
    let pop = &state.current_population;
    info!(
        "generation {} fitness {:.6} sigma {:.6}",
        pop.generation_number, pop.fitness, pop.sigma_fitness
    );
    state.history.push(summary(pop, mutations));
    let cap = state.config.max_results_total;
    let resources = state.current_population.resources.clone();
    merge_resources(&mut state.all_resources, &resources, cap);

    let pool_keys: BTreeSet<&str> = state
        .keyword_pool
        .iter()
        .map(|g| g.lemma_key.as_str())
        .collect();
    let mut generated: BTreeSet<Gene> = state.generated_keywords.iter().cloned().collect();
    for q in &state.current_population.queries {
        for g in &q.genes {
            if !pool_keys.contains(g.lemma_key.as_str()) {
                generated.insert(g.clone());
            }
        }
    }
    state.generated_keywords = generated.into_iter().collect();
    state.stop_reason = should_stop(&state.current_population, &state.config);
}

fn autosave(state: &RunState) {
    if !state.config.autosave {
        return;
    }
    if let Some(path) = &state.config.state_path {
        if let Err(e) = persistence::save_state(state, path) {
            warn!("autosave failed: {e}");
        }
    }
}

/// Creates the initial population. It is evaluated by the first call to [`advance`].
pub fn start(config: Config, pool: Vec<Gene>) -> Result<RunState, EvolveError> {
    let mut rng = RunState::seeded_rng(config.rng_seed);
    let init = create_initial_population(&pool, &config, &mut rng)?;
    Ok(RunState {
        config,
        keyword_pool: pool,
        generated_keywords: Vec::new(),
        init_population: init.clone(),
        current_population: init,
        history: Vec::new(),
        all_resources: Vec::new(),
        stop_reason: StopReason::Running,
        rng,
    })
}

fn fail(state: &mut RunState, err: EvolveError) {
    warn!("run stopped: {err}");
    state.stop_reason = StopReason::Error(err.to_string());
}

/// Runs one generation. On failure the population and generator are left as
/// they were before the step and the stop reason becomes `Error`.
pub fn step(state: &mut RunState, lexicon: &Lexicon, engine: &dyn SearchEngine) {
    let config = state.config.clone();
    let pattern = pattern_of(&state.keyword_pool);
    let backup: RunRng = state.rng.clone();

    let selected = select_best(&state.current_population, &config);
    let mut children = Vec::new();
    let mut mutations = 0;
    for (a, b) in select_parent_pairs(&selected) {
        let (c1, c2) = crossover(
            (&a, &b),
            &config,
            lexicon,
            &state.keyword_pool,
            &mut state.rng,
        );
        for child in [c1, c2] {
            let (child, mutated) = mutate(child, &config, &state.keyword_pool, &mut state.rng);
            mutations += usize::from(mutated);
            children.push(child);
        }
    }
    match next_generation(
        &state.current_population,
        children,
        engine,
        lexicon,
        &config,
        &state.keyword_pool,
        &pattern,
        &mut state.rng,
    ) {
        Ok(outcome) => {
            state.current_population = outcome.population;
            record(state, mutations);
        }
        Err(e) => {
            state.rng = backup;
            fail(state, e);
        }
    }
}

/// Continues a run until it reaches a terminal stop reason, or until the
/// current generation reaches `until` when given. A state stopped by an error
/// is retried from where it failed.
pub fn advance(
    state: &mut RunState,
    lexicon: &Lexicon,
    engine: &dyn SearchEngine,
    until: Option<u32>,
) {
    if state.stop_reason.is_terminal() {
        return;
    }
    state.stop_reason = StopReason::Running;
    if !state.is_initialized() {
        let pattern = pattern_of(&state.keyword_pool);
        match evaluate(
            state.init_population.clone(),
            engine,
            lexicon,
            &state.config,
            &pattern,
        ) {
            Ok(pop) => {
                state.init_population = pop.clone();
                state.current_population = pop;
                record(state, 0);
                autosave(state);
            }
            Err(e) => {
                fail(state, e);
                autosave(state);
                return;
            }
        }
    }
    while state.stop_reason == StopReason::Running
        && until.is_none_or(|g| state.current_population.generation_number < g)
    {
        step(state, lexicon, engine);
        autosave(state);
    }
}

/// Full run from a validated config and keyword pool.
pub fn run(
    config: Config,
    lexicon: &Lexicon,
    engine: &dyn SearchEngine,
    pool: Vec<Gene>,
) -> Result<RunState, EvolveError> {
    let mut state = start(config, pool)?;
    advance(&mut state, lexicon, engine, None);
    Ok(state)
}
