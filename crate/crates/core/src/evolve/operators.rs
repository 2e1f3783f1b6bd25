//! Genetic operators: initialization, selection, outbreeding pairing,
//! synonym-aware crossover and mutation.

use std::collections::BTreeSet;

use log::debug;
use rand::seq::index;
use rand::Rng;

use super::{EvolveError, Gene, Population, Query};
use crate::config::{Config, CrossoverType};
use crate::lexicon::Lexicon;

/// Slack allowed when comparing a fitness against a mean of equal values.
const FITNESS_EPS: f64 = 1e-12;

/// `genes` distinct pool genes drawn uniformly without replacement.
pub fn random_query<R: Rng + ?Sized>(pool: &[Gene], genes: usize, rng: &mut R) -> Query {
    let picked = index::sample(rng, pool.len(), genes)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect();
    Query::new(picked)
}

pub fn create_initial_population<R: Rng + ?Sized>(
    pool: &[Gene],
    config: &Config,
    rng: &mut R,
) -> Result<Population, EvolveError> {
    if pool.len() < config.genes_per_query {
        return Err(EvolveError::PoolTooSmall {
            pool: pool.len(),
            genes: config.genes_per_query,
        });
    }
    let queries = (0..config.population_size)
        .map(|_| random_query(pool, config.genes_per_query, rng))
        .collect();
    Ok(Population::new(0, queries))
}

/// Queries whose fitness reaches `c1` times the mean fitness, best first.
/// Falls back to the two fittest queries when fewer qualify.
pub fn select_best(population: &Population, config: &Config) -> Vec<Query> {
    let mut ranked: Vec<&Query> = population.queries.iter().collect();
    ranked.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    if ranked.is_empty() {
        return Vec::new();
    }
    let mean = ranked.iter().map(|q| q.fitness).sum::<f64>() / ranked.len() as f64;
    let threshold = config.parent_criterion_mult * mean;
    let qualified = ranked
        .iter()
        .take_while(|q| q.fitness >= threshold - FITNESS_EPS)
        .count();
    ranked.into_iter().take(qualified.max(2)).cloned().collect()
}

/// Jaccard distance between the lemma-key sets of two queries.
pub fn genotype_distance(a: &Query, b: &Query) -> f64 {
    let sa = a.key_set();
    let sb = b.key_set();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - sa.intersection(&sb).count() as f64 / union as f64
}

/// Greedy maximum-distance pairing over `selected`, which must be in fitness order.
///
/// Ties go to the higher-fitness partner, then to the earlier one. An odd
/// leftover is paired with the most distant already-paired query.
pub fn parent_pair_indices(selected: &[Query]) -> Vec<(usize, usize)> {
    let n = selected.len();
    let mut paired = vec![false; n];
    let mut pairs = Vec::with_capacity(n.div_ceil(2));

    let pick = |i: usize, allowed: &dyn Fn(usize) -> bool| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| j != i && allowed(j)) {
            let d = genotype_distance(&selected[i], &selected[j]);
            let better = match best {
                None => true,
                Some((b, bd)) => d > bd || (d == bd && selected[j].fitness > selected[b].fitness),
            };
            if better {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    };

    for i in 0..n {
        if paired[i] {
            continue;
        }
        let snapshot = paired.clone();
        let partner = pick(i, &|j| !snapshot[j]).or_else(|| pick(i, &|j| snapshot[j]));
        if let Some(j) = partner {
            paired[i] = true;
            paired[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

pub fn select_parent_pairs(selected: &[Query]) -> Vec<(Query, Query)> {
    parent_pair_indices(selected)
        .into_iter()
        .map(|(i, j)| (selected[i].clone(), selected[j].clone()))
        .collect()
}

/// Crossover with a random cut point (one-point) or random per-position masks (discrete).
pub fn crossover<R: Rng + ?Sized>(
    pair: (&Query, &Query),
    config: &Config,
    lexicon: &Lexicon,
    pool: &[Gene],
    rng: &mut R,
) -> (Query, Query) {
    let (a, b) = pair;
    let len = a.genes.len().min(b.genes.len());
    let (c1, c2) = match config.crossover_type {
        CrossoverType::OnePoint if len >= 2 => {
            let cut = rng.random_range(1..len);
            recombine_at(&a.genes, &b.genes, cut)
        }
        _ => {
            let mut c1 = Vec::with_capacity(len);
            let mut c2 = Vec::with_capacity(len);
            for k in 0..len {
                if rng.random_bool(0.5) {
                    c1.push(a.genes[k].clone());
                    c2.push(b.genes[k].clone());
                } else {
                    c1.push(b.genes[k].clone());
                    c2.push(a.genes[k].clone());
                }
            }
            (c1, c2)
        }
    };
    let c1 = finish_child(c1, config, lexicon, pool, rng);
    let c2 = finish_child(c2, config, lexicon, pool, rng);
    (c1, c2)
}

/// One-point crossover at a fixed cut, without synonym substitution or repair.
pub fn crossover_at(a: &Query, b: &Query, cut: usize) -> (Query, Query) {
    let (c1, c2) = recombine_at(&a.genes, &b.genes, cut);
    (Query::new(c1), Query::new(c2))
}

fn recombine_at(a: &[Gene], b: &[Gene], cut: usize) -> (Vec<Gene>, Vec<Gene>) {
    let c1 = a[..cut].iter().chain(&b[cut..]).cloned().collect();
    let c2 = b[..cut].iter().chain(&a[cut..]).cloned().collect();
    (c1, c2)
}

fn finish_child<R: Rng + ?Sized>(
    mut genes: Vec<Gene>,
    config: &Config,
    lexicon: &Lexicon,
    pool: &[Gene],
    rng: &mut R,
) -> Query {
    for gene in genes.iter_mut() {
        let synonyms = lexicon.synonyms_of(&gene.lemma_key);
        if synonyms.is_empty() || !rng.random_bool(config.synonym_swap_prob) {
            continue;
        }
        let pick = synonyms
            .iter()
            .nth(rng.random_range(0..synonyms.len()))
            .expect("index within synonym set");
        *gene = Gene::new(pick.clone(), pick.clone());
    }
    repair_duplicates(&mut genes, pool, rng);
    Query::new(genes)
}

/// Replaces later duplicate lemma keys with pool genes absent from the child.
fn repair_duplicates<R: Rng + ?Sized>(genes: &mut [Gene], pool: &[Gene], rng: &mut R) {
    let mut seen = BTreeSet::new();
    for i in 0..genes.len() {
        if seen.insert(genes[i].lemma_key.clone()) {
            continue;
        }
        let present: BTreeSet<&str> = genes.iter().map(|g| g.lemma_key.as_str()).collect();
        let free: Vec<&Gene> = pool
            .iter()
            .filter(|g| !present.contains(g.lemma_key.as_str()))
            .collect();
        if free.is_empty() {
            debug!(
                "no free pool gene to repair duplicate '{}'",
                genes[i].lemma_key
            );
            continue;
        }
        genes[i] = free[rng.random_range(0..free.len())].clone();
        seen.insert(genes[i].lemma_key.clone());
    }
}

/// With probability `m1`, replaces one random gene by a pool gene not already in the query.
///
/// Returns the (possibly unchanged) query and whether it was mutated.
pub fn mutate<R: Rng + ?Sized>(
    query: Query,
    config: &Config,
    pool: &[Gene],
    rng: &mut R,
) -> (Query, bool) {
    if query.genes.is_empty() || !rng.random_bool(config.mutation_prob) {
        return (query, false);
    }
    let free: Vec<&Gene> = pool
        .iter()
        .filter(|g| !query.has_lemma(&g.lemma_key))
        .collect();
    if free.is_empty() {
        debug!("no unused pool gene to mutate '{}'", query.query_text);
        return (query, false);
    }
    let pos = rng.random_range(0..query.genes.len());
    let replacement = free[rng.random_range(0..free.len())].clone();
    let mut genes = query.genes;
    genes[pos] = replacement;
    (Query::new(genes), true)
}
