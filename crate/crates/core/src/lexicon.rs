//! Tokenization, lemma normalization and synonym lookup.
//!
//! A [`Lexicon`] combines a surface→lemma dictionary, disjoint synonym groups,
//! a stopword set, and ordered suffix-strip rules used when the dictionary
//! has no entry for a token.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::Config;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read dictionary {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid lemma entry '{0}': lemmas are lowercase letters and digits only")]
    InvalidEntry(String),
    #[error("lemma chain at '{0}'")]
    LemmaChain(String),
    #[error("lemma '{0}' in two synonym groups")]
    SynonymOverlap(String),
    #[error("stopword '{0}' appears in a synonym group")]
    StopwordInSynonyms(String),
    #[error("invalid stem rule '{0}'")]
    InvalidRule(String),
}

pub type Result<T, E = LexiconError> = std::result::Result<T, E>;

/// Splits text into lowercase runs of letters and digits.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && tokenize(s).len() == 1 && tokenize(s)[0] == s
}

/// Canonical form of a (possibly multi-word) lemma phrase: its tokens joined by single spaces.
fn canonical_phrase(s: &str) -> Option<String> {
    let toks = tokenize(s);
    (!toks.is_empty()).then(|| toks.join(" "))
}

/// Replaces `suffix` by `replacement` at the end of a token.
///
/// A rule whose replacement equals its suffix is a guard: when it is the first
/// match, stripping stops and the token is kept as is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRule {
    pub suffix: String,
    pub replacement: String,
}

impl StemRule {
    pub fn new(suffix: &str, replacement: &str) -> Self {
        Self {
            suffix: suffix.to_owned(),
            replacement: replacement.to_owned(),
        }
    }

    fn is_guard(&self) -> bool {
        self.suffix == self.replacement
    }
}

/// Minimum number of characters that must remain before a suffix is stripped.
pub const MIN_STEM_LEN: usize = 3;

const ENGLISH_STOPWORDS: &str = "a about above after again against all am an and any are as at be because \
been before being below between both but by can could did do does doing down during each few for from \
further had has have having he her here hers herself him himself his how i if in into is it its itself \
just me more most my myself no nor not now of off on once only or other our ours ourselves out over own \
same she should so some such than that the their theirs them themselves then there these they this those \
through to too under until up very was we were what when where which while who whom why will with would \
you your yours yourself yourselves";

/// Raw lexicon content before invariant checks.
#[derive(Debug, Clone, Default)]
pub struct LexiconParts {
    pub lemma_map: BTreeMap<String, String>,
    pub synonym_groups: Vec<Vec<String>>,
    pub stopwords: BTreeSet<String>,
    pub stem_rules: Vec<StemRule>,
}

/// Optional dictionary files. Any of them may be absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconFiles {
    /// `surface<TAB>lemma` per line.
    pub lemmas: Option<PathBuf>,
    /// One comma-separated group per line.
    pub synonyms: Option<PathBuf>,
    /// One lemma per line.
    pub stopwords: Option<PathBuf>,
}

impl LexiconFiles {
    pub fn from_config(config: &Config) -> Self {
        Self {
            lemmas: config.lemma_dict.clone(),
            synonyms: config.synonym_dict.clone(),
            stopwords: config.stopword_list.clone(),
        }
    }
}

impl LexiconParts {
    /// English stopwords and a small suffix rule set.
    pub fn english() -> Self {
        Self {
            stopwords: ENGLISH_STOPWORDS
                .split_whitespace()
                .map(str::to_owned)
                .collect(),
            stem_rules: vec![
                StemRule::new("sses", "ss"),
                StemRule::new("ies", "y"),
                StemRule::new("ss", "ss"),
                StemRule::new("us", "us"),
                StemRule::new("is", "is"),
                StemRule::new("eed", "eed"),
                StemRule::new("ing", ""),
                StemRule::new("ed", ""),
                StemRule::new("s", ""),
            ],
            ..Self::default()
        }
    }

    /// Appends the content of every present file.
    pub fn read_files(&mut self, files: &LexiconFiles) -> Result<()> {
        if let Some(path) = &files.lemmas {
            for (line_no, line) in read_lines(path)? {
                let fields: Vec<&str> = line.split('\t').collect();
                let malformed = |message: &str| LexiconError::Malformed {
                    path: path.clone(),
                    line: line_no,
                    message: message.to_owned(),
                };
                if fields.len() != 2 {
                    return Err(malformed("expected 'surface<TAB>lemma'"));
                }
                let surface = fields[0].trim().to_lowercase();
                let lemma = fields[1].trim().to_lowercase();
                if !is_token(&surface) || !is_token(&lemma) {
                    return Err(malformed("surface and lemma must be single words"));
                }
                self.lemma_map.insert(surface, lemma);
            }
        }
        if let Some(path) = &files.synonyms {
            for (line_no, line) in read_lines(path)? {
                let mut group = Vec::new();
                for entry in line.split(',') {
                    if entry.trim().is_empty() {
                        continue;
                    }
                    let phrase =
                        canonical_phrase(entry).ok_or_else(|| LexiconError::Malformed {
                            path: path.clone(),
                            line: line_no,
                            message: format!("invalid synonym entry '{}'", entry.trim()),
                        })?;
                    group.push(phrase);
                }
                self.synonym_groups.push(group);
            }
        }
        if let Some(path) = &files.stopwords {
            for (line_no, line) in read_lines(path)? {
                let word = line.trim().to_lowercase();
                if !is_token(&word) {
                    return Err(LexiconError::Malformed {
                        path: path.clone(),
                        line: line_no,
                        message: format!("invalid stopword '{word}'"),
                    });
                }
                self.stopwords.insert(word);
            }
        }
        Ok(())
    }
}

/// Non-blank lines with their 1-based line numbers.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').to_owned()))
        .collect())
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    lemma_map: HashMap<String, String>,
    lemmas: HashSet<String>,
    synonym_groups: Vec<BTreeSet<String>>,
    group_of: HashMap<String, usize>,
    stopwords: HashSet<String>,
    stem_rules: Vec<StemRule>,
}

impl Lexicon {
    /// Builds a lexicon, rejecting chained lemmas, overlapping synonym groups
    /// and stopwords inside synonym groups.
    pub fn from_parts(parts: LexiconParts) -> Result<Self> {
        for (surface, lemma) in &parts.lemma_map {
            for s in [surface, lemma] {
                if !is_token(s) {
                    return Err(LexiconError::InvalidEntry(s.clone()));
                }
            }
            if let Some(next) = parts.lemma_map.get(lemma) {
                if next != lemma {
                    return Err(LexiconError::LemmaChain(lemma.clone()));
                }
            }
        }
        for rule in &parts.stem_rules {
            let valid = !rule.suffix.is_empty()
                && is_token(&rule.suffix)
                && (rule.replacement.is_empty() || is_token(&rule.replacement))
                && (rule.is_guard() || rule.replacement.len() < rule.suffix.len());
            if !valid {
                return Err(LexiconError::InvalidRule(format!(
                    "{}→{}",
                    rule.suffix, rule.replacement
                )));
            }
        }
        let stopwords: HashSet<String> = parts.stopwords.into_iter().collect();
        let mut group_of = HashMap::new();
        let mut synonym_groups = Vec::new();
        for group in parts.synonym_groups {
            let group: BTreeSet<String> = group.into_iter().collect();
            if group.is_empty() {
                continue;
            }
            let idx = synonym_groups.len();
            for lemma in &group {
                if canonical_phrase(lemma).as_deref() != Some(lemma.as_str()) {
                    return Err(LexiconError::InvalidEntry(lemma.clone()));
                }
                if stopwords.contains(lemma) {
                    return Err(LexiconError::StopwordInSynonyms(lemma.clone()));
                }
                if group_of.insert(lemma.clone(), idx).is_some() {
                    return Err(LexiconError::SynonymOverlap(lemma.clone()));
                }
            }
            synonym_groups.push(group);
        }
        let lemmas = parts.lemma_map.values().cloned().collect();
        Ok(Self {
            lemma_map: parts.lemma_map.into_iter().collect(),
            lemmas,
            synonym_groups,
            group_of,
            stopwords,
            stem_rules: parts.stem_rules,
        })
    }

    /// Lexicon with no dictionaries, stopwords or rules: normalization is the identity.
    pub fn empty() -> Self {
        Self::from_parts(LexiconParts::default()).expect("empty lexicon is valid")
    }

    /// Built-in English stopwords and suffix rules.
    pub fn english() -> Self {
        Self::from_parts(LexiconParts::english()).expect("built-in lexicon is valid")
    }

    /// English defaults extended with the dictionary files named in `config`.
    pub fn for_config(config: &Config) -> Result<Self> {
        let mut parts = LexiconParts::english();
        parts.read_files(&LexiconFiles::from_config(config))?;
        Self::from_parts(parts)
    }

    pub fn is_stopword(&self, lemma: &str) -> bool {
        self.stopwords.contains(lemma)
    }

    pub fn synonym_groups(&self) -> &[BTreeSet<String>] {
        &self.synonym_groups
    }

    /// Applies the first matching rule repeatedly until no rule (or a guard) matches.
    fn strip(&self, token: &str) -> String {
        let mut current = token.to_owned();
        'outer: loop {
            for rule in &self.stem_rules {
                if !current.ends_with(&rule.suffix) {
                    continue;
                }
                if rule.is_guard() {
                    break 'outer;
                }
                let stem_len = current.chars().count() - rule.suffix.chars().count();
                if stem_len < MIN_STEM_LEN {
                    continue;
                }
                current.truncate(current.len() - rule.suffix.len());
                current.push_str(&rule.replacement);
                continue 'outer;
            }
            break;
        }
        current
    }

    fn resolve(&self, token: &str) -> String {
        if let Some(lemma) = self.lemma_map.get(token) {
            return lemma.clone();
        }
        if self.lemmas.contains(token) {
            return token.to_owned();
        }
        let stripped = self.strip(token);
        match self.lemma_map.get(&stripped) {
            Some(lemma) => lemma.clone(),
            None => stripped,
        }
    }

    /// Lemma of a token, or `None` for stopwords.
    pub fn normalize(&self, token: &str) -> Option<String> {
        if self.stopwords.contains(token) {
            return None;
        }
        let lemma = self.resolve(token);
        (!self.stopwords.contains(&lemma)).then_some(lemma)
    }

    pub fn lemmatize_text(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .iter()
            .filter_map(|t| self.normalize(t))
            .collect()
    }

    /// The other members of the lemma's synonym group.
    pub fn synonyms_of(&self, lemma: &str) -> BTreeSet<String> {
        match self.group_of.get(lemma) {
            Some(&idx) => self.synonym_groups[idx]
                .iter()
                .filter(|l| l.as_str() != lemma)
                .cloned()
                .collect(),
            None => BTreeSet::new(),
        }
    }
}

/// Loads a lexicon made only of the given files (no built-in stopwords or rules).
pub fn load_lexicon(files: &LexiconFiles) -> Result<Lexicon> {
    let mut parts = LexiconParts::default();
    parts.read_files(files)?;
    Lexicon::from_parts(parts)
}
