//! Okapi BM25 inverted index over an analyzed corpus.

use super::{analyze, Corpus, RetrievalError, SearchHit};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexicalIndex {
    /// term -> ordered (passage id, term frequency) postings.
    postings: BTreeMap<String, Vec<(String, u32)>>,
    doc_lengths: BTreeMap<String, u32>,
    avg_doc_length: f64,
    doc_count: usize,
    pub k1: f64,
    pub b: f64,
}

impl LexicalIndex {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn postings(&self, term: &str) -> Option<&[(String, u32)]> {
        self.postings.get(term).map(|v| v.as_slice())
    }

    pub fn doc_length(&self, id: &str) -> Option<u32> {
        self.doc_lengths.get(id).copied()
    }
}

/// Builds the inverted index. Deterministic: identical corpora yield
/// identical postings regardless of ingestion order (ids sort the postings).
pub fn build_index(corpus: &Corpus) -> Result<LexicalIndex, RetrievalError> {
    if corpus.count() == 0 {
        return Err(RetrievalError::EmptyCorpus);
    }
    let mut postings: BTreeMap<String, Vec<(String, u32)>> = BTreeMap::new();
    let mut doc_lengths = BTreeMap::new();
    let mut total_len = 0u64;
    for passage in corpus.iter() {
        let tokens = analyze(&passage.contents);
        total_len += tokens.len() as u64;
        doc_lengths.insert(passage.id.clone(), tokens.len() as u32);
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for tok in &tokens {
            *counts.entry(tok.as_str()).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            postings
                .entry(term.to_string())
                .or_default()
                .push((passage.id.clone(), tf));
        }
    }
    Ok(LexicalIndex {
        postings,
        doc_lengths,
        avg_doc_length: total_len as f64 / corpus.count() as f64,
        doc_count: corpus.count(),
        k1: DEFAULT_K1,
        b: DEFAULT_B,
    })
}

/// Scores every matching passage with Okapi BM25 and returns the top
/// `min(k, doc_count)` hits, ties broken by ascending passage id.
pub fn search(
    index: &LexicalIndex,
    query: &str,
    k: usize,
) -> Result<Vec<SearchHit>, RetrievalError> {
    let terms = analyze(query);
    if terms.is_empty() {
        return Err(RetrievalError::EmptyQuery);
    }
    let n = index.doc_count as f64;
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for term in &terms {
        let Some(postings) = index.postings.get(term) else {
            continue;
        };
        let df = postings.len() as f64;
        let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
        for (id, tf) in postings {
            let dl = index.doc_lengths[id] as f64;
            let tf = *tf as f64;
            let norm =
                (tf * (index.k1 + 1.0)) / (tf + index.k1 * (1.0 - index.b + index.b * dl / index.avg_doc_length));
            *scores.entry(id.as_str()).or_insert(0.0) += idf * norm;
        }
    }
    let mut ranked: Vec<(&str, f64)> = scores.into_iter().collect();
    // Score descending, then id ascending for reproducible ties.
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    Ok(ranked
        .into_iter()
        .take(k.min(index.doc_count))
        .enumerate()
        .map(|(i, (id, score))| SearchHit {
            passage_id: id.to_string(),
            score,
            rank: i + 1,
        })
        .collect())
}
