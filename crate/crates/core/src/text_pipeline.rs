//! Binary bag-of-words featurization.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

static DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Default corpus-frequency cutoff for vocabulary terms.
pub const DEFAULT_MIN_FREQUENCY: usize = 3;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "pos")]
    Positive,
    #[serde(rename = "neg")]
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_sign(value: f64) -> Self {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// +1.0 for positive, -1.0 for negative.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        })
    }
}

/// Which side of a fixed train/test split a document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "is_train")]
    pub split: Split,
}

fn is_train(s: &Split) -> bool {
    *s == Split::Train
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label,
            split: Split::Train,
        }
    }
}

/// Sparse binary feature vector: the sorted indices of present terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    indices: Vec<u32>,
}

impl FeatureVector {
    /// Sorts and deduplicates `indices`.
    pub fn from_indices(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn contains(&self, index: u32) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: BTreeMap<String, u32>,
    pub min_frequency: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.terms.get(term).copied()
    }

    /// Terms in index order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }
}

/// Keeps tokens whose total count over `corpus` reaches `min_frequency`,
/// minus stopwords; indices follow lexicographic term order.
pub fn build_vocabulary<'a, I>(
    corpus: I,
    stopwords: &HashSet<String>,
    min_frequency: usize,
) -> Result<Vocabulary, TextError>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut seen_any = false;
    for doc in corpus {
        seen_any = true;
        for tok in tokenize(&doc.text) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    if !seen_any {
        return Err(TextError::EmptyCorpus);
    }
    let mut kept: Vec<String> = counts
        .into_iter()
        .filter(|(t, c)| *c >= min_frequency && !stopwords.contains(t))
        .map(|(t, _)| t)
        .collect();
    kept.sort_unstable();
    let terms = kept.into_iter().zip(0u32..).collect();
    Ok(Vocabulary {
        terms,
        min_frequency,
    })
}

pub fn vectorize(doc: &Document, vocab: &Vocabulary) -> FeatureVector {
    vectorize_text(&doc.text, vocab)
}

pub fn vectorize_text(text: &str, vocab: &Vocabulary) -> FeatureVector {
    FeatureVector::from_indices(
        tokenize(text)
            .iter()
            .filter_map(|t| vocab.index_of(t))
            .collect(),
    )
}

/// Parses stopwords: one token per line, `#` starts a comment.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

pub fn read_stopwords(path: &Path) -> Result<HashSet<String>, TextError> {
    Ok(parse_stopwords(&std::fs::read_to_string(path)?))
}

/// Reads a JSON Lines corpus. Blank lines are skipped; ids must be unique.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>, TextError> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|source| TextError::Parse { line: i + 1, source })?;
        if !ids.insert(doc.id.clone()) {
            return Err(TextError::DuplicateId(doc.id));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<W: std::io::Write>(mut writer: W, docs: &[Document]) -> std::io::Result<()> {
    for d in docs {
        serde_json::to_writer(&mut writer, d)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}
