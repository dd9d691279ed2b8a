//! Minimal retrieval service and its client counterpart.
//!
//! The service answers `POST /search` with the same ranking the in-process
//! `search` produces, and `GET /health` with the indexed document count.

use super::{index, Corpus, LexicalIndex, RetrievalConfig, RetrievalError, SearchHit};
use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use std::net::SocketAddr;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireHit {
    pub id: String,
    pub score: f64,
    pub rank: usize,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResponse {
    pub hits: Vec<WireHit>,
}

struct ServiceState {
    index: LexicalIndex,
    corpus: Corpus,
    default_k: usize,
}

/// A running retrieval service; shuts down when dropped.
pub struct ServiceHandle {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(handle) = self.thread.take() {
            let _ = handle.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves the index from a
/// background thread with its own runtime.
pub fn serve(
    index: LexicalIndex,
    corpus: Corpus,
    addr: SocketAddr,
    config: &RetrievalConfig,
) -> Result<ServiceHandle, RetrievalError> {
    let state = Arc::new(ServiceState {
        index,
        corpus,
        default_k: config.k,
    });
    let std_listener = std::net::TcpListener::bind(addr)?;
    std_listener.set_nonblocking(true)?;
    let local_addr = std_listener.local_addr()?;
    let (shutdown_tx, shutdown_rx) = tokio::sync::oneshot::channel::<()>();
    let thread = std::thread::spawn(move || {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .expect("retrieval service runtime");
        runtime.block_on(async move {
            let app = Router::new()
                .route("/search", post(handle_search))
                .route("/health", get(handle_health))
                .with_state(state);
            let listener = tokio::net::TcpListener::from_std(std_listener)
                .expect("retrieval service listener");
            axum::serve(listener, app)
                .with_graceful_shutdown(async move {
                    let _ = shutdown_rx.await;
                })
                .await
                .expect("retrieval service");
        });
    });
    Ok(ServiceHandle {
        addr: local_addr,
        shutdown: Some(shutdown_tx),
        thread: Some(thread),
    })
}

async fn handle_search(
    State(state): State<Arc<ServiceState>>,
    Json(request): Json<SearchRequest>,
) -> Result<Json<SearchResponse>, (StatusCode, Json<serde_json::Value>)> {
    let k = request.k.unwrap_or(state.default_k);
    let hits = index::search(&state.index, &request.query, k).map_err(|e| {
        (
            StatusCode::BAD_REQUEST,
            Json(serde_json::json!({ "error": e.to_string() })),
        )
    })?;
    let wire = hits
        .into_iter()
        .map(|h| {
            let contents = state
                .corpus
                .get(&h.passage_id)
                .map(|p| p.contents.clone())
                .unwrap_or_default();
            WireHit {
                id: h.passage_id,
                score: h.score,
                rank: h.rank,
                contents,
            }
        })
        .collect();
    Ok(Json(SearchResponse { hits: wire }))
}

async fn handle_health(State(state): State<Arc<ServiceState>>) -> Json<serde_json::Value> {
    Json(serde_json::json!({
        "status": "ok",
        "doc_count": state.index.doc_count(),
    }))
}

/// Client counterpart of `serve`: same request shape, same ranking.
/// Transport failures surface as a retryable `Network` error, distinct from
/// the non-retryable `EmptyQuery`.
pub fn query_remote(
    base_url: &str,
    query: &str,
    k: Option<usize>,
) -> Result<Vec<WireHit>, RetrievalError> {
    let client = reqwest::blocking::Client::new();
    let response = client
        .post(format!("{}/search", base_url.trim_end_matches('/')))
        .json(&SearchRequest {
            query: query.to_string(),
            k,
        })
        .send()
        .map_err(|e| RetrievalError::Network(e.to_string()))?;
    let status = response.status();
    if status == StatusCode::BAD_REQUEST {
        // The service rejects empty-after-analysis queries with 400.
        let body: serde_json::Value = response
            .json()
            .map_err(|e| RetrievalError::Network(e.to_string()))?;
        let message = body["error"].as_str().unwrap_or("bad request");
        if message.contains("empty after analysis") {
            return Err(RetrievalError::EmptyQuery);
        }
        return Err(RetrievalError::Network(message.to_string()));
    }
    if !status.is_success() {
        return Err(RetrievalError::Network(format!("status {status}")));
    }
    let body: SearchResponse = response
        .json()
        .map_err(|e| RetrievalError::Network(e.to_string()))?;
    Ok(body.hits)
}

/// Converts wire hits back to the in-process hit shape.
pub fn wire_to_hits(hits: &[WireHit]) -> Vec<SearchHit> {
    hits.iter()
        .map(|h| SearchHit {
            passage_id: h.id.clone(),
            score: h.score,
            rank: h.rank,
        })
        .collect()
}
