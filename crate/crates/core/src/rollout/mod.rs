//! Rollout engines for the two agent loops.
//!
//! The search agent alternates search queries with injected retrieval
//! results until it reports; the reasoning agent alternates factual
//! questions with injected search-agent reports until it emits a verdict.
//! Generation pauses on the closing action tags via stop sequences.

mod backend;
pub mod prompts;

pub use backend::{
    ensure_stop_suffix, scripted_completion, Completion, CompletionBackend, DecodingParams,
    EndpointError, HttpEndpoint, ScriptRule, ScriptedBackend, Trigger,
};

use crate::protocol::{
    detect_pause, validate_format, PauseAction, Role, TagKind, Transcript, Verdict,
};
use crate::retrieval::{self, Corpus, LexicalIndex, RetrievalError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

/// Injected when a search-agent sub-rollout fails inside a reasoning rollout.
pub const SEARCH_AGENT_FAILURE_SENTINEL: &str =
    "The search agent could not find relevant information.";

/// Per-rollout resource caps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolloutLimits {
    pub max_question_calls: usize,
    pub max_search_calls: usize,
    pub max_context_units: u64,
    pub max_wall_time_secs: u64,
}

impl Default for RolloutLimits {
    fn default() -> Self {
        RolloutLimits {
            max_question_calls: 8,
            max_search_calls: 8,
            max_context_units: 8192,
            max_wall_time_secs: 600,
        }
    }
}

/// Why a rollout stopped; exactly one reason per rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    FormatViolation,
    LimitExceeded,
    ContextOverflow,
    EndpointFailure,
}

/// One complete search-agent episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchRollout {
    pub question: String,
    pub transcript: Transcript,
    pub queries: Vec<String>,
    pub report: Option<String>,
    pub termination: Termination,
}

/// One complete reasoning-agent episode. Each exchange pairs a posed
/// question with the report (or failure sentinel) injected for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReasoningRollout {
    pub claim: String,
    pub transcript: Transcript,
    pub exchanges: Vec<(String, String)>,
    pub verdict: Option<Verdict>,
    pub termination: Termination,
}

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("rollout group size must be at least 2, got {0}")]
    GroupTooSmall(usize),
}

/// Supplies the formatted top-k result block for a search query.
pub trait Retriever: Send + Sync {
    fn top_k_formatted(&self, query: &str) -> Result<String, RetrievalError>;
}

/// In-process retrieval over a built index.
pub struct LocalRetriever {
    pub index: LexicalIndex,
    pub corpus: Corpus,
    pub k: usize,
}

impl Retriever for LocalRetriever {
    fn top_k_formatted(&self, query: &str) -> Result<String, RetrievalError> {
        let hits = retrieval::search(&self.index, query, self.k)?;
        retrieval::format_results(&hits, &self.corpus)
    }
}

/// Retrieval through the network service.
pub struct RemoteRetriever {
    pub base_url: String,
    pub k: usize,
}

impl Retriever for RemoteRetriever {
    fn top_k_formatted(&self, query: &str) -> Result<String, RetrievalError> {
        let hits = retrieval::query_remote(&self.base_url, query, Some(self.k))?;
        if hits.is_empty() {
            return Ok(retrieval::NO_RESULTS_SENTINEL.to_string());
        }
        Ok(hits
            .iter()
            .map(|h| format!("({}) {}", h.rank, h.contents))
            .collect::<Vec<_>>()
            .join("\n"))
    }
}

/// Handle through which the reasoning rollout asks the search agent. Only
/// the report crosses this boundary, never the search transcript.
pub trait SearchAgent: Send + Sync {
    fn answer(&self, question: &str) -> Result<String, String>;
}

/// The standard search-agent handle: runs a full search rollout per question.
pub struct SearchAgentRunner<'a> {
    pub backend: &'a dyn CompletionBackend,
    pub retriever: &'a dyn Retriever,
    pub limits: RolloutLimits,
    pub decoding: DecodingParams,
}

impl SearchAgent for SearchAgentRunner<'_> {
    fn answer(&self, question: &str) -> Result<String, String> {
        let rollout =
            run_search_rollout(self.backend, self.retriever, question, &self.limits, &self.decoding);
        match rollout.report {
            Some(report) => Ok(report),
            None => Err(format!("search rollout ended with {:?}", rollout.termination)),
        }
    }
}

fn context_units(prompt: &str, transcript: &Transcript, last_usage: Option<u64>) -> u64 {
    match last_usage {
        Some(tokens) => tokens,
        // character-count proxy when the endpoint reports no usage
        None => ((prompt.len() + transcript.raw().len()) as u64 + 3) / 4,
    }
}

/// Runs the search agent loop for one question.
pub fn run_search_rollout(
    backend: &dyn CompletionBackend,
    retriever: &dyn Retriever,
    question: &str,
    limits: &RolloutLimits,
    decoding: &DecodingParams,
) -> SearchRollout {
    let prompt = prompts::search_prompt(question);
    let stops = vec![TagKind::Search.close_tag(), TagKind::Report.close_tag()];
    let mut params = decoding.clone();
    params.stop_sequences = stops.clone();
    let mut transcript = Transcript::new(Role::Search);
    let mut queries = Vec::new();
    let mut last_usage = None;
    let started = Instant::now();

    let finish = |transcript: Transcript, queries: Vec<String>, report, termination| SearchRollout {
        question: question.to_string(),
        transcript,
        queries,
        report,
        termination,
    };

    loop {
        if started.elapsed() > Duration::from_secs(limits.max_wall_time_secs) {
            return finish(transcript, queries, None, Termination::LimitExceeded);
        }
        if context_units(&prompt, &transcript, last_usage) > limits.max_context_units {
            return finish(transcript, queries, None, Termination::ContextOverflow);
        }
        let full = format!("{prompt}{}", transcript.raw());
        let completion = match backend.complete(&full, &params) {
            Ok(c) => c,
            Err(_) => return finish(transcript, queries, None, Termination::EndpointFailure),
        };
        last_usage = completion.usage_tokens;
        let text = ensure_stop_suffix(&completion.text, &stops);
        transcript = transcript.with_generated(&text);
        match detect_pause(transcript.raw(), Role::Search).0 {
            PauseAction::SearchIssued(query) => {
                if queries.len() >= limits.max_search_calls {
                    return finish(transcript, queries, None, Termination::LimitExceeded);
                }
                queries.push(query.clone());
                let block = match retriever.top_k_formatted(&query) {
                    Ok(text) => text,
                    Err(RetrievalError::EmptyQuery) => retrieval::NO_RESULTS_SENTINEL.to_string(),
                    Err(_) => {
                        return finish(transcript, queries, None, Termination::EndpointFailure)
                    }
                };
                transcript = match transcript.inject_result(&block) {
                    Ok(t) => t,
                    Err(_) => {
                        return finish(transcript, queries, None, Termination::FormatViolation)
                    }
                };
            }
            PauseAction::ReportEmitted(report) => {
                return if validate_format(&transcript, Role::Search).valid() {
                    finish(transcript, queries, Some(report), Termination::Completed)
                } else {
                    finish(transcript, queries, None, Termination::FormatViolation)
                };
            }
            _ => return finish(transcript, queries, None, Termination::FormatViolation),
        }
    }
}

/// Runs the reasoning agent loop for one claim.
pub fn run_reasoning_rollout(
    backend: &dyn CompletionBackend,
    search_agent: &dyn SearchAgent,
    claim: &str,
    limits: &RolloutLimits,
    decoding: &DecodingParams,
) -> ReasoningRollout {
    let prompt = prompts::reasoning_prompt(claim);
    let stops = vec![
        TagKind::Question.close_tag(),
        TagKind::Verification.close_tag(),
    ];
    let mut params = decoding.clone();
    params.stop_sequences = stops.clone();
    let mut transcript = Transcript::new(Role::Reasoning);
    let mut exchanges = Vec::new();
    let mut last_usage = None;
    let started = Instant::now();

    let finish =
        |transcript: Transcript, exchanges: Vec<(String, String)>, verdict, termination| {
            ReasoningRollout {
                claim: claim.to_string(),
                transcript,
                exchanges,
                verdict,
                termination,
            }
        };

    loop {
        if started.elapsed() > Duration::from_secs(limits.max_wall_time_secs) {
            return finish(transcript, exchanges, None, Termination::LimitExceeded);
        }
        if context_units(&prompt, &transcript, last_usage) > limits.max_context_units {
            return finish(transcript, exchanges, None, Termination::ContextOverflow);
        }
        let full = format!("{prompt}{}", transcript.raw());
        let completion = match backend.complete(&full, &params) {
            Ok(c) => c,
            Err(_) => return finish(transcript, exchanges, None, Termination::EndpointFailure),
        };
        last_usage = completion.usage_tokens;
        let text = ensure_stop_suffix(&completion.text, &stops);
        transcript = transcript.with_generated(&text);
        match detect_pause(transcript.raw(), Role::Reasoning).0 {
            PauseAction::QuestionPosed(question) => {
                if exchanges.len() >= limits.max_question_calls {
                    return finish(transcript, exchanges, None, Termination::LimitExceeded);
                }
                // A failed sub-rollout degrades to a fixed sentinel; the
                // final outcome is still scored.
                let report = search_agent
                    .answer(&question)
                    .unwrap_or_else(|_| SEARCH_AGENT_FAILURE_SENTINEL.to_string());
                exchanges.push((question, report.clone()));
                transcript = match transcript.inject_result(&report) {
                    Ok(t) => t,
                    Err(_) => {
                        return finish(transcript, exchanges, None, Termination::FormatViolation)
                    }
                };
            }
            PauseAction::VerdictEmitted(verdict) => {
                return if validate_format(&transcript, Role::Reasoning).valid() {
                    finish(transcript, exchanges, Some(verdict), Termination::Completed)
                } else {
                    finish(transcript, exchanges, None, Termination::FormatViolation)
                };
            }
            _ => return finish(transcript, exchanges, None, Termination::FormatViolation),
        }
    }
}

/// Runs `group_size` independent rollouts of the same input via the bounded
/// rayon pool. Individual failures stay inside the group; results are
/// collected in rollout-index order.
pub fn run_group<T, F>(group_size: usize, run: F) -> Result<Vec<T>, RolloutError>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if group_size < 2 {
        return Err(RolloutError::GroupTooSmall(group_size));
    }
    Ok((0..group_size).into_par_iter().map(run).collect())
}

/// One line of the rollout dump: identity, input, outcome, and the segment
/// records of the transcript.
pub fn dump_search_rollout(rollout_id: &str, rollout: &SearchRollout) -> serde_json::Value {
    serde_json::json!({
        "rollout_id": rollout_id,
        "role": Role::Search,
        "input": rollout.question,
        "termination": rollout.termination,
        "report": rollout.report,
        "segments": rollout.transcript.segments(),
    })
}

pub fn dump_reasoning_rollout(rollout_id: &str, rollout: &ReasoningRollout) -> serde_json::Value {
    serde_json::json!({
        "rollout_id": rollout_id,
        "role": Role::Reasoning,
        "input": rollout.claim,
        "termination": rollout.termination,
        "verdict": rollout.verdict,
        "segments": rollout.transcript.segments(),
    })
}
