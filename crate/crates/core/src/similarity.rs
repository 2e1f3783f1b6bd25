//! TF-IDF vector space model and cosine similarity.
//!
//! Each document is a sparse vector of `tf * idf` weights where tf is the raw
//! in-document count and `idf = ln((P + 1) / P_t)` over a corpus of `P`
//! documents, `P_t` of which contain the term.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("term statistics need at least one document")]
    EmptyCorpus,
    #[error("document frequency {doc_freq} outside [1, {doc_count}]")]
    DocFreqOutOfRange { doc_count: usize, doc_freq: usize },
}

/// Corpus-level document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TermStats {
    doc_count: usize,
    doc_freq: BTreeMap<String, usize>,
}

impl TermStats {
    /// Statistics of a corpus with no documents.
    pub(crate) fn empty() -> Self {
        Self {
            doc_count: 0,
            doc_freq: BTreeMap::new(),
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn doc_freq(&self, lemma: &str) -> Option<usize> {
        self.doc_freq.get(lemma).copied()
    }

    /// Vocabulary in lexicographic order.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.doc_freq.keys().map(String::as_str)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.doc_freq.len()
    }
}

pub fn build_term_stats<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<TermStats, SimilarityError> {
    if docs.is_empty() {
        return Err(SimilarityError::EmptyCorpus);
    }
    let mut doc_freq = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for term in distinct {
            *doc_freq.entry(term.to_owned()).or_insert(0) += 1;
        }
    }
    Ok(TermStats {
        doc_count: docs.len(),
        doc_freq,
    })
}

/// Logarithm used by idf. Cosine similarity does not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

pub fn idf(doc_count: usize, doc_freq: usize) -> Result<f64, SimilarityError> {
    idf_with_base(doc_count, doc_freq, LogBase::Natural)
}

pub fn idf_with_base(
    doc_count: usize,
    doc_freq: usize,
    base: LogBase,
) -> Result<f64, SimilarityError> {
    if doc_freq == 0 || doc_freq > doc_count {
        return Err(SimilarityError::DocFreqOutOfRange {
            doc_count,
            doc_freq,
        });
    }
    Ok(base.log((doc_count as f64 + 1.0) / doc_freq as f64))
}

/// Sparse TF-IDF vector; zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocVector {
    weights: BTreeMap<String, f64>,
}

impl DocVector {
    pub fn from_weights(weights: BTreeMap<String, f64>) -> Self {
        Self {
            weights: weights.into_iter().filter(|(_, w)| *w > 0.0).collect(),
        }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn get(&self, lemma: &str) -> f64 {
        self.weights.get(lemma).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_weights(
            self.weights
                .iter()
                .map(|(k, w)| (k.clone(), w * factor))
                .collect(),
        )
    }
}

pub fn tf_idf_vector<S: AsRef<str>>(doc: &[S], stats: &TermStats) -> DocVector {
    tf_idf_vector_with_base(doc, stats, LogBase::Natural)
}

pub fn tf_idf_vector_with_base<S: AsRef<str>>(
    doc: &[S],
    stats: &TermStats,
    base: LogBase,
) -> DocVector {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for lemma in doc {
        *counts.entry(lemma.as_ref()).or_insert(0) += 1;
    }
    let weights = counts
        .into_iter()
        .filter_map(|(lemma, tf)| {
            let df = stats.doc_freq(lemma)?;
            let idf = idf_with_base(stats.doc_count, df, base).ok()?;
            Some((lemma.to_owned(), tf as f64 * idf))
        })
        .collect();
    DocVector::from_weights(weights)
}

/// Cosine of the angle between two non-negative vectors; 0 when either is empty.
pub fn cosine(a: &DocVector, b: &DocVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (small, large) = if a.weights.len() <= b.weights.len() {
        (a, b)
    } else {
        (b, a)
    };
    let dot: f64 = small
        .weights
        .iter()
        .filter_map(|(k, w)| large.weights.get(k).map(|v| w * v))
        .sum();
    (dot / (a.norm() * b.norm())).clamp(0.0, 1.0)
}

/// Similarity of `doc` to `pattern` with idf taken over `corpus`.
pub fn similarity<S: AsRef<str>>(pattern: &[S], doc: &[S], corpus: &[Vec<S>]) -> f64 {
    similarity_with_base(pattern, doc, corpus, LogBase::Natural)
}

pub fn similarity_with_base<S: AsRef<str>>(
    pattern: &[S],
    doc: &[S],
    corpus: &[Vec<S>],
    base: LogBase,
) -> f64 {
    match build_term_stats(corpus) {
        Ok(stats) => cosine(
            &tf_idf_vector_with_base(pattern, &stats, base),
            &tf_idf_vector_with_base(doc, &stats, base),
        ),
        Err(_) => 0.0,
    }
}

/// Pattern vector and corpus statistics built once and reused for many documents.
#[derive(Debug, Clone)]
pub struct PatternScorer {
    stats: TermStats,
    pattern: DocVector,
}

impl PatternScorer {
    /// `documents` should not contain the pattern; it is added as one more document.
    pub fn new<P: AsRef<str>, D: AsRef<str>>(pattern: &[P], documents: &[&[D]]) -> Self {
        let mut corpus: Vec<Vec<&str>> = documents
            .iter()
            .map(|d| d.iter().map(AsRef::as_ref).collect())
            .collect();
        corpus.push(pattern.iter().map(AsRef::as_ref).collect());
        let stats = build_term_stats(&corpus).expect("corpus contains the pattern");
        let pattern = tf_idf_vector(pattern, &stats);
        Self { stats, pattern }
    }

    pub fn stats(&self) -> &TermStats {
        &self.stats
    }

    pub fn score<S: AsRef<str>>(&self, doc: &[S]) -> f64 {
        cosine(&self.pattern, &tf_idf_vector(doc, &self.stats))
    }
}
