//! Backend and retriever construction shared by the subcommands.

use anyhow::{Context as _, Result};
use claimcheck_core::retrieval::{build_index, ingest_corpus, Corpus, LexicalIndex};
use claimcheck_core::rollout::{
    CompletionBackend, HttpEndpoint, LocalRetriever, ScriptedBackend,
};
use std::path::Path;

/// Loads the scripted backend from its JSON file.
pub fn load_script(path: &Path) -> Result<ScriptedBackend> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read script {}", path.display()))?;
    ScriptedBackend::from_json(&text)
        .with_context(|| format!("bad script file {}", path.display()))
}

/// Builds a completion backend: the scripted one when a script is given,
/// otherwise an HTTP endpoint.
pub fn completion_backend(
    script: Option<&ScriptedBackend>,
    endpoint: Option<&str>,
    what: &str,
) -> Result<Box<dyn CompletionBackend>> {
    if let Some(script) = script {
        return Ok(Box::new(script.clone()));
    }
    let endpoint = endpoint.with_context(|| format!("no {what} endpoint configured"))?;
    Ok(Box::new(HttpEndpoint::new(endpoint)))
}

pub fn build_corpus(path: &Path) -> Result<(LexicalIndex, Corpus)> {
    let corpus = ingest_corpus(path)
        .with_context(|| format!("cannot ingest corpus {}", path.display()))?;
    let index = build_index(&corpus).context("cannot build index")?;
    Ok((index, corpus))
}

pub fn local_retriever(path: &Path, k: usize) -> Result<LocalRetriever> {
    let (index, corpus) = build_corpus(path)?;
    Ok(LocalRetriever { index, corpus, k })
}
