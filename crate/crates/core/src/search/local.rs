//! Offline engine over a directory of text documents.
//!
//! A document is a UTF-8 file whose first line is the title and whose
//! remaining lines are the body; its path relative to the corpus root is its
//! location. Matching is disjunctive and hits are ordered by TF-IDF cosine,
//! then by location.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use walkdir::WalkDir;

use super::{SearchEngine, SearchError, SearchHit};
use crate::lexicon::Lexicon;
use crate::similarity::{build_term_stats, cosine, tf_idf_vector, DocVector, TermStats};

/// Length of the body prefix returned as a snippet, in characters.
pub const SNIPPET_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedDoc {
    pub location: String,
    pub title: String,
    pub body: String,
    pub body_lemmas: Vec<String>,
}

impl IndexedDoc {
    pub fn snippet(&self) -> String {
        self.body.chars().take(SNIPPET_CHARS).collect()
    }
}

#[derive(Debug, Clone)]
pub struct LocalIndex {
    /// Sorted by location; a doc id is its position here.
    docs: Vec<IndexedDoc>,
    postings: BTreeMap<String, BTreeSet<usize>>,
    stats: TermStats,
    vectors: Vec<DocVector>,
}

impl LocalIndex {
    /// Indexes documents given as `(location, title, body)`.
    pub fn from_documents<I>(documents: I, lexicon: &Lexicon) -> Result<Self, SearchError>
    where
        I: IntoIterator<Item = (String, String, String)>,
    {
        let mut by_location = BTreeMap::new();
        for (location, title, body) in documents {
            if location.is_empty() {
                return Err(SearchError::Corpus("document with empty location".into()));
            }
            let body_lemmas = lexicon.lemmatize_text(&format!("{title}\n{body}"));
            let doc = IndexedDoc {
                location: location.clone(),
                title,
                body,
                body_lemmas,
            };
            if by_location.insert(location.clone(), doc).is_some() {
                return Err(SearchError::Corpus(format!(
                    "duplicate document id '{location}'"
                )));
            }
        }
        let docs: Vec<IndexedDoc> = by_location.into_values().collect();

        let mut postings: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (id, doc) in docs.iter().enumerate() {
            for lemma in &doc.body_lemmas {
                postings.entry(lemma.clone()).or_default().insert(id);
            }
        }
        let stats = if docs.is_empty() {
            TermStats::empty()
        } else {
            let lemma_lists: Vec<Vec<&str>> = docs
                .iter()
                .map(|d| d.body_lemmas.iter().map(String::as_str).collect())
                .collect();
            build_term_stats(&lemma_lists).expect("non-empty corpus")
        };
        let vectors = docs
            .iter()
            .map(|d| tf_idf_vector(&d.body_lemmas, &stats))
            .collect();
        Ok(Self {
            docs,
            postings,
            stats,
            vectors,
        })
    }

    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn stats(&self) -> &TermStats {
        &self.stats
    }

    /// Ids of documents containing `lemma`, if any.
    pub fn postings(&self, lemma: &str) -> Option<&BTreeSet<usize>> {
        self.postings.get(lemma)
    }

    pub fn posting_lists(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.postings
    }

    /// Ranked `(doc id, score)` pairs, best first.
    pub fn scored<S: AsRef<str>>(&self, query_lemmas: &[S], limit: usize) -> Vec<(usize, f64)> {
        let mut candidates = BTreeSet::new();
        for lemma in query_lemmas {
            if let Some(ids) = self.postings.get(lemma.as_ref()) {
                candidates.extend(ids.iter().copied());
            }
        }
        if candidates.is_empty() {
            return Vec::new();
        }
        let query = tf_idf_vector(query_lemmas, &self.stats);
        let mut scored: Vec<(usize, f64)> = candidates
            .into_iter()
            .map(|id| (id, cosine(&query, &self.vectors[id])))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.docs[a.0].location.cmp(&self.docs[b.0].location))
        });
        scored.truncate(limit);
        scored
    }
}

/// Indexes every regular, non-hidden file under `dir`.
pub fn index_corpus(dir: &Path, lexicon: &Lexicon) -> Result<LocalIndex, SearchError> {
    if !dir.is_dir() {
        return Err(SearchError::Corpus(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut documents = Vec::new();
    let walker = WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry.map_err(|e| SearchError::Corpus(e.to_string()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let text = fs::read_to_string(path)
            .map_err(|e| SearchError::Corpus(format!("{}: {e}", path.display())))?;
        let rel = path
            .strip_prefix(dir)
            .expect("walkdir yields children of dir");
        let location = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        let (title, body) = match text.split_once('\n') {
            Some((t, b)) => (t.trim_end_matches('\r').to_owned(), b.to_owned()),
            None => (text.clone(), String::new()),
        };
        documents.push((location, title, body));
    }
    LocalIndex::from_documents(documents, lexicon)
}

/// Ranks indexed documents against already-lemmatized query terms.
pub fn rank_local<S: AsRef<str>>(
    query_lemmas: &[S],
    index: &LocalIndex,
    limit: usize,
) -> Vec<SearchHit> {
    to_hits(index, index.scored(query_lemmas, limit))
        .into_iter()
        .map(|(hit, _)| hit)
        .collect()
}

fn to_hits(index: &LocalIndex, scored: Vec<(usize, f64)>) -> Vec<(SearchHit, f64)> {
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (id, score))| {
            let doc = &index.docs[id];
            let hit = SearchHit {
                location: doc.location.clone(),
                title: doc.title.clone(),
                snippet: doc.snippet(),
                engine: LocalEngine::ID.to_owned(),
                rank: i + 1,
            };
            (hit, score)
        })
        .collect()
}

/// [`SearchEngine`] over a [`LocalIndex`]; query text is lemmatized with its lexicon.
#[derive(Debug, Clone)]
pub struct LocalEngine {
    index: LocalIndex,
    lexicon: Lexicon,
}

impl LocalEngine {
    pub const ID: &'static str = "local";

    pub fn new(index: LocalIndex, lexicon: Lexicon) -> Self {
        Self { index, lexicon }
    }

    pub fn index(&self) -> &LocalIndex {
        &self.index
    }

    /// Hits with their cosine scores.
    pub fn search_scored(&self, query_text: &str, limit: usize) -> Vec<(SearchHit, f64)> {
        let lemmas = self.lexicon.lemmatize_text(query_text);
        to_hits(&self.index, self.index.scored(&lemmas, limit))
    }
}

impl SearchEngine for LocalEngine {
    fn id(&self) -> &str {
        Self::ID
    }

    fn execute(&self, query_text: &str, limit: usize) -> Result<Vec<SearchHit>, SearchError> {
        if limit == 0 {
            return Err(SearchError::InvalidLimit);
        }
        let lemmas = self.lexicon.lemmatize_text(query_text);
        Ok(rank_local(&lemmas, &self.index, limit))
    }
}
