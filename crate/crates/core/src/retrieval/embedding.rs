//! Alternative dense retrieval backend behind an external embedding endpoint.
//!
//! The default retrieval path is lexical; this backend exists so a deployment
//! with a neural embedder can plug in without changing callers. Passages and
//! queries are embedded through the endpoint and ranked by inner product.

use super::{Corpus, RetrievalError, SearchHit};

/// Anything that can turn text into a fixed-width vector.
pub trait EmbeddingEndpoint: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError>;
}

/// Inner-product top-k over pre-embedded passages.
pub struct EmbeddingIndex {
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

impl EmbeddingIndex {
    pub fn build(corpus: &Corpus, endpoint: &dyn EmbeddingEndpoint) -> Result<Self, RetrievalError> {
        if corpus.count() == 0 {
            return Err(RetrievalError::EmptyCorpus);
        }
        let mut ids = Vec::with_capacity(corpus.count());
        let mut vectors = Vec::with_capacity(corpus.count());
        let mut dim = 0;
        for passage in corpus.iter() {
            let v = endpoint.embed(&passage.contents)?;
            if dim == 0 {
                dim = v.len();
            } else if v.len() != dim {
                return Err(RetrievalError::Embedding(format!(
                    "vector width {} != {} for passage {:?}",
                    v.len(),
                    dim,
                    passage.id
                )));
            }
            ids.push(passage.id.clone());
            vectors.push(v);
        }
        Ok(EmbeddingIndex { ids, vectors, dim })
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    pub fn search(
        &self,
        endpoint: &dyn EmbeddingEndpoint,
        query: &str,
        k: usize,
    ) -> Result<Vec<SearchHit>, RetrievalError> {
        if query.trim().is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        let q = endpoint.embed(query)?;
        if q.len() != self.dim {
            return Err(RetrievalError::Embedding(format!(
                "query vector width {} != index width {}",
                q.len(),
                self.dim
            )));
        }
        let mut scored: Vec<(usize, f64)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.iter().zip(&q).map(|(a, b)| a * b).sum()))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| self.ids[a.0].cmp(&self.ids[b.0]))
        });
        Ok(scored
            .into_iter()
            .take(k.min(self.ids.len()))
            .enumerate()
            .map(|(rank, (i, score))| SearchHit {
                passage_id: self.ids[i].clone(),
                score,
                rank: rank + 1,
            })
            .collect())
    }
}
