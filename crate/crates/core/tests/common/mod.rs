//! Fixtures, brute-force oracles and random generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use gaf_core::config::{AggregationMode, Config, CrossoverType};
use gaf_core::evolve::{GenerationSummary, RunRng};
use gaf_core::fitness::{population_fitness, sigma_fitness, Appearance, FitnessAttrs};
use gaf_core::lexicon::{LexiconFiles, LexiconParts};
use gaf_core::persistence::load_keyword_pool;
use gaf_core::search::{index_corpus, LocalEngine, LocalIndex};
use gaf_core::{Gene, Lexicon, Population, Query, Resource, RunState, SearchHit, StopReason};
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// English defaults plus the fixture synonym dictionary.
pub fn fixture_lexicon() -> Lexicon {
    let mut parts = LexiconParts::english();
    parts
        .read_files(&LexiconFiles {
            synonyms: Some(fixture_dir().join("synonyms.txt")),
            ..LexiconFiles::default()
        })
        .expect("fixture synonyms load");
    Lexicon::from_parts(parts).expect("fixture lexicon is consistent")
}

pub fn fixture_index(lexicon: &Lexicon) -> LocalIndex {
    index_corpus(&fixture_dir().join("corpus"), lexicon).expect("fixture corpus indexes")
}

pub fn fixture_engine(lexicon: &Lexicon) -> LocalEngine {
    LocalEngine::new(fixture_index(lexicon), lexicon.clone())
}

pub fn fixture_pool(lexicon: &Lexicon) -> Vec<Gene> {
    load_keyword_pool(&fixture_dir().join("keywords.txt"), lexicon).expect("fixture pool loads")
}

pub fn fixture_config(seed: u64) -> Config {
    let dir = fixture_dir();
    Config {
        keyword_pool_path: dir.join("keywords.txt"),
        corpus_dir: Some(dir.join("corpus")),
        synonym_dict: Some(dir.join("synonyms.txt")),
        rng_seed: seed,
        ..Config::default()
    }
}

/// Topic label of a fixture document: the file name prefix before `-`.
pub fn topic_of(location: &str) -> &str {
    let name = location.rsplit('/').next().unwrap_or(location);
    name.split('-').next().unwrap_or(name)
}

// ---- dense tf-idf oracle ----

/// Full term-document matrix over a sorted vocabulary.
pub struct DenseModel {
    pub vocab: Vec<String>,
    pub idf: Vec<f64>,
}

impl DenseModel {
    pub fn new<S: AsRef<str>>(corpus: &[Vec<S>], log: fn(f64) -> f64) -> Self {
        let vocab: Vec<String> = corpus
            .iter()
            .flatten()
            .map(|t| t.as_ref().to_owned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let p = corpus.len() as f64;
        let idf = vocab
            .iter()
            .map(|term| {
                let df = corpus
                    .iter()
                    .filter(|doc| doc.iter().any(|t| t.as_ref() == term))
                    .count() as f64;
                log((p + 1.0) / df)
            })
            .collect();
        Self { vocab, idf }
    }

    pub fn vector<S: AsRef<str>>(&self, doc: &[S]) -> Vec<f64> {
        self.vocab
            .iter()
            .zip(&self.idf)
            .map(|(term, idf)| doc.iter().filter(|t| t.as_ref() == term).count() as f64 * idf)
            .collect()
    }
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn dense_similarity<S: AsRef<str>>(
    pattern: &[S],
    doc: &[S],
    corpus: &[Vec<S>],
    log: fn(f64) -> f64,
) -> f64 {
    let model = DenseModel::new(corpus, log);
    dense_cosine(&model.vector(pattern), &model.vector(doc))
}

/// Locations ranked by brute force: every document sharing a query lemma,
/// by cosine descending then location ascending.
pub fn dense_ranking(
    index: &LocalIndex,
    query_lemmas: &[String],
    limit: usize,
) -> Vec<(String, f64)> {
    let corpus: Vec<Vec<String>> = index.docs().iter().map(|d| d.body_lemmas.clone()).collect();
    let model = DenseModel::new(&corpus, f64::ln);
    let q = model.vector(query_lemmas);
    let mut scored: Vec<(String, f64)> = index
        .docs()
        .iter()
        .filter(|d| d.body_lemmas.iter().any(|t| query_lemmas.contains(t)))
        .map(|d| {
            (
                d.location.clone(),
                dense_cosine(&q, &model.vector(&d.body_lemmas)),
            )
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(limit);
    scored
}

// ---- fitness oracle ----

/// Expected attributes of one resource recomputed from raw result lists.
#[derive(Debug, Clone)]
pub struct ExpectedResource {
    pub location: String,
    pub p_bar: f64,
    pub r: usize,
    pub s: f64,
    pub w: f64,
}

pub fn fitness_oracle(
    results: &[Vec<SearchHit>],
    lexicon: &Lexicon,
    pattern: &[String],
    config: &Config,
) -> Vec<ExpectedResource> {
    let n = results.len();
    // location -> (first title+snippet, best rank per query)
    let mut order: Vec<String> = Vec::new();
    let mut text: BTreeMap<String, String> = BTreeMap::new();
    let mut best: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    for (qi, hits) in results.iter().enumerate() {
        for h in hits {
            if !text.contains_key(&h.location) {
                order.push(h.location.clone());
                text.insert(h.location.clone(), format!("{} {}", h.title, h.snippet));
            }
            let rank = best
                .entry(h.location.clone())
                .or_default()
                .entry(qi)
                .or_insert(h.rank);
            *rank = (*rank).min(h.rank);
        }
    }
    let contents: Vec<Vec<String>> = order
        .iter()
        .map(|l| lexicon.lemmatize_text(&text[l]))
        .collect();
    let mut corpus = contents.clone();
    corpus.push(pattern.to_vec());
    let model = DenseModel::new(&corpus, f64::ln);
    let pv = model.vector(pattern);

    let f1 = config.results_per_query as f64;
    let mut out: Vec<ExpectedResource> = order
        .iter()
        .zip(&contents)
        .map(|(loc, content)| {
            let ranks = &best[loc];
            let p_bar = ranks.values().sum::<usize>() as f64 / ranks.len() as f64;
            let r = ranks.len();
            let s = dense_cosine(&pv, &model.vector(content));
            let p_score = (f1 + 1.0 - p_bar) / f1;
            let r_score = r as f64 / n as f64;
            let w = config.weight_position * p_score
                + config.weight_recurrence * r_score
                + config.weight_similarity * s;
            ExpectedResource {
                location: loc.clone(),
                p_bar,
                r,
                s,
                w,
            }
        })
        .collect();

    let mut hosts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, e) in out.iter().enumerate() {
        let host = if let Some(rest) = e.location.split_once("://") {
            rest.1.split('/').next().map(str::to_owned)
        } else {
            e.location.split_once('/').map(|(h, _)| h.to_owned())
        };
        if let Some(h) = host.filter(|h| !h.is_empty()) {
            hosts.entry(h).or_default().push(i);
        }
    }
    for members in hosts.values_mut() {
        members.sort_by(|&a, &b| {
            out[b]
                .w
                .partial_cmp(&out[a].w)
                .unwrap()
                .then_with(|| out[a].location.cmp(&out[b].location))
        });
        for (j, &i) in members.iter().enumerate() {
            out[i].w *= config.same_host_coeff.powi(j as i32);
        }
    }
    out
}

// ---- random generators ----

const WORDS: &[&str] = &[
    "solar", "panel", "cell", "grid", "energy", "star", "orbit", "protein", "gene", "roof",
    "inverter", "battery", "light", "module", "power", "sun", "plasma", "tissue",
];

pub fn random_words<R: Rng>(rng: &mut R, max: usize) -> Vec<String> {
    let k = rng.random_range(0..=max);
    (0..k)
        .map(|_| WORDS.choose(rng).unwrap().to_string())
        .collect()
}

pub fn random_string<R: Rng>(rng: &mut R) -> String {
    const PIECES: &[&str] = &[
        "a", "Ж", "é", " ", "\"", "\\", "\n", "<x>", "&", "q", "💡", "\t",
    ];
    let k = rng.random_range(0..12);
    (0..k).map(|_| *PIECES.choose(rng).unwrap()).collect()
}

fn random_f64<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => rng.random::<f64>(),
        2 => f64::from_bits(rng.random::<u64>() & 0x3FEF_FFFF_FFFF_FFFF),
        _ => rng.random_range(0.0..1.0) / 3.0,
    }
}

pub fn random_config<R: Rng>(rng: &mut R) -> Config {
    let cap = rng.random_range(1..=60);
    let crossover_type = if rng.random_bool(0.5) {
        CrossoverType::OnePoint
    } else {
        CrossoverType::Discrete
    };
    let min_genes = if crossover_type == CrossoverType::OnePoint {
        2
    } else {
        1
    };
    Config {
        population_size: rng.random_range(2..=6),
        genes_per_query: rng.random_range(min_genes..=4),
        results_per_query: rng.random_range(1..=10),
        max_results_per_population: rng.random_range(1..=30),
        max_results_total: rng.random_range(1..=40),
        same_host_coeff: rng.random_range(0.01..=1.0),
        weight_position: random_f64(rng) + 0.01,
        weight_recurrence: random_f64(rng),
        weight_similarity: random_f64(rng),
        aggregation_mode: if rng.random_bool(0.5) {
            AggregationMode::Mean
        } else {
            AggregationMode::Median
        },
        parent_criterion_mult: rng.random_range(0.1..2.0),
        mutation_prob: random_f64(rng).min(1.0),
        synonym_swap_prob: random_f64(rng).min(1.0),
        target_generations: rng.random_range(0..=cap),
        sigma_threshold: random_f64(rng),
        max_generations_cap: cap,
        crossover_type,
        rng_seed: rng.random(),
        autosave: rng.random_bool(0.5),
        state_path: rng
            .random_bool(0.5)
            .then(|| PathBuf::from("runs/Ж state.gaf")),
        corpus_dir: rng.random_bool(0.5).then(|| PathBuf::from("corpus dir")),
        adapter_url: rng
            .random_bool(0.3)
            .then(|| "http://127.0.0.1:9/search?x=1#f".to_owned()),
        ..Config::default()
    }
}

fn random_gene_from<R: Rng>(rng: &mut R, i: usize) -> Gene {
    let surface = format!("{}{}", random_string(rng).replace('\n', ""), i);
    Gene::new(format!("k{i} {}", WORDS.choose(rng).unwrap()), surface)
}

fn random_hit<R: Rng>(rng: &mut R, rank: usize) -> SearchHit {
    SearchHit {
        location: format!("h{}/{}", rng.random_range(0..3), rng.random_range(0..20)),
        title: random_string(rng),
        snippet: random_string(rng),
        engine: "local".into(),
        rank,
    }
}

fn random_population<R: Rng>(
    rng: &mut R,
    config: &Config,
    pool: &[Gene],
    generation: u32,
) -> Population {
    let queries: Vec<Query> = (0..config.population_size)
        .map(|_| {
            let genes: Vec<Gene> = pool
                .choose_multiple(rng, config.genes_per_query)
                .cloned()
                .collect();
            let k = rng.random_range(0..=config.results_per_query);
            Query {
                results: (1..=k).map(|r| random_hit(rng, r)).collect(),
                fitness: random_f64(rng),
                ..Query::new(genes)
            }
        })
        .collect();
    let n = queries.len();
    let resources = (0..rng.random_range(0..=config.max_results_per_population.min(6)))
        .map(|i| {
            let idx: BTreeSet<usize> = (0..rng.random_range(1..=n))
                .map(|_| rng.random_range(0..n))
                .collect();
            let appearances: Vec<Appearance> = idx
                .into_iter()
                .map(|query_index| Appearance {
                    query_index,
                    rank: rng.random_range(1..=config.results_per_query),
                })
                .collect();
            Resource {
                location: format!("site{}/doc-{i}", rng.random_range(0..4)),
                title: random_string(rng),
                snippet: random_string(rng),
                true_content: random_words(rng, 5),
                fitness: FitnessAttrs {
                    p_bar: random_f64(rng),
                    p_score: random_f64(rng),
                    r: appearances.len(),
                    r_score: random_f64(rng),
                    s: random_f64(rng),
                    w: random_f64(rng),
                },
                appearances,
            }
        })
        .collect();
    let fs: Vec<f64> = queries.iter().map(|q| q.fitness).collect();
    Population {
        generation_number: generation,
        fitness: population_fitness(&fs, config.aggregation_mode),
        sigma_fitness: sigma_fitness(&fs),
        queries,
        resources,
    }
}

/// A random state that satisfies every structural invariant checked on load.
pub fn random_state<R: Rng>(rng: &mut R) -> RunState {
    let config = random_config(rng);
    let pool: Vec<Gene> = (0..config.genes_per_query + rng.random_range(0..5))
        .map(|i| random_gene_from(rng, i))
        .collect();
    let generations = rng.random_range(0..5u32);
    let init = random_population(rng, &config, &pool, 0);
    let current = if generations == 0 {
        init.clone()
    } else {
        random_population(rng, &config, &pool, generations)
    };
    let initialized = generations > 0 || rng.random_bool(0.5);
    let history: Vec<GenerationSummary> = if initialized {
        (0..=generations)
            .map(|g| GenerationSummary {
                generation_number: g,
                fitness: random_f64(rng),
                sigma_fitness: random_f64(rng),
                best_query_text: random_string(rng),
                mutations: rng.random_range(0..10),
            })
            .collect()
    } else {
        Vec::new()
    };
    let all_resources = current
        .resources
        .iter()
        .take(config.max_results_total)
        .cloned()
        .collect();
    let stop_reason = match rng.random_range(0..5) {
        0 => StopReason::Running,
        1 => StopReason::Stability,
        2 => StopReason::GenerationTarget,
        3 => StopReason::HardCap,
        _ => StopReason::Error(random_string(rng)),
    };
    let mut run_rng: RunRng = RunState::seeded_rng(rng.random());
    for _ in 0..rng.random_range(0..100) {
        run_rng.next_u32();
    }
    let (init_population, current_population) = if initialized {
        (init, current)
    } else {
        (init.clone(), init)
    };
    RunState {
        generated_keywords: pool.iter().take(1).cloned().collect(),
        keyword_pool: pool,
        config,
        init_population,
        current_population,
        history,
        all_resources,
        stop_reason,
        rng: run_rng,
    }
}
