//! Passage corpus ingestion, lexical ranked retrieval, and the retrieval
//! service plus its client.

mod embedding;
mod index;
mod service;

pub use embedding::{EmbeddingEndpoint, EmbeddingIndex};
pub use index::{build_index, search, LexicalIndex};
pub use service::{
    query_remote, serve, wire_to_hits, SearchRequest, SearchResponse, ServiceHandle, WireHit,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

/// A chunked corpus passage: title line plus body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub contents: String,
}

/// Id-keyed passage collection. BTreeMap keeps iteration order independent
/// of ingestion order, which makes index construction deterministic.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    passages: BTreeMap<String, Passage>,
}

impl Corpus {
    pub fn count(&self) -> usize {
        self.passages.len()
    }

    pub fn get(&self, id: &str) -> Option<&Passage> {
        self.passages.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Passage> {
        self.passages.values()
    }

    pub fn insert(&mut self, passage: Passage) -> Result<(), RetrievalError> {
        if passage.contents.is_empty() {
            return Err(RetrievalError::EmptyContents { id: passage.id });
        }
        if self.passages.contains_key(&passage.id) {
            return Err(RetrievalError::DuplicateId {
                id: passage.id,
                first_line: 0,
                second_line: 0,
            });
        }
        self.passages.insert(passage.id.clone(), passage);
        Ok(())
    }
}

/// One ranked search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub passage_id: String,
    pub score: f64,
    /// 1-based, consecutive.
    pub rank: usize,
}

/// Top-k and analyzer settings; k defaults to 3.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrievalConfig {
    pub k: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig { k: 3 }
    }
}

pub const NO_RESULTS_SENTINEL: &str = "No results found.";

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("corpus file not found or unreadable: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed corpus line {line}: {source}")]
    MalformedLine {
        line: usize,
        source: serde_json::Error,
    },
    #[error("duplicate passage id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("passage {id:?} has empty contents")]
    EmptyContents { id: String },
    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,
    #[error("query is empty after analysis")]
    EmptyQuery,
    #[error("hit references unknown passage id {0:?}")]
    DanglingPassage(String),
    #[error("retrieval service error: {0}")]
    Network(String),
    #[error("embedding endpoint error: {0}")]
    Embedding(String),
}

impl RetrievalError {
    /// Network failures are retryable; everything else is not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, RetrievalError::Network(_))
    }
}

#[derive(Deserialize)]
struct CorpusLine {
    id: String,
    contents: String,
    #[serde(default)]
    title: Option<String>,
}

/// Loads a line-delimited corpus file with fields `id` and `contents`; an
/// optional `title` is folded into the first line of the contents.
pub fn ingest_corpus(path: &Path) -> Result<Corpus, RetrievalError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut corpus = Corpus::default();
    let mut seen_lines: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusLine = serde_json::from_str(&line)
            .map_err(|source| RetrievalError::MalformedLine { line: line_no, source })?;
        if let Some(first) = seen_lines.get(&record.id) {
            return Err(RetrievalError::DuplicateId {
                id: record.id,
                first_line: *first,
                second_line: line_no,
            });
        }
        seen_lines.insert(record.id.clone(), line_no);
        let contents = match record.title {
            Some(title) if !title.is_empty() => format!("{title}\n{}", record.contents),
            _ => record.contents,
        };
        if contents.is_empty() {
            return Err(RetrievalError::EmptyContents { id: record.id });
        }
        corpus
            .passages
            .insert(record.id.clone(), Passage { id: record.id, contents });
    }
    Ok(corpus)
}

/// Lowercase alphanumeric analyzer: split on non-alphanumeric, no stemming,
/// no stopwords.
pub fn analyze(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Formats ranked hits into the numbered result block that rollout engines
/// pass to `inject_result`. Zero hits yield the fixed sentinel line.
pub fn format_results(hits: &[SearchHit], corpus: &Corpus) -> Result<String, RetrievalError> {
    if hits.is_empty() {
        return Ok(NO_RESULTS_SENTINEL.to_string());
    }
    let mut lines = Vec::with_capacity(hits.len());
    for hit in hits {
        let passage = corpus
            .get(&hit.passage_id)
            .ok_or_else(|| RetrievalError::DanglingPassage(hit.passage_id.clone()))?;
        lines.push(format!("({}) {}", hit.rank, passage.contents));
    }
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests;
