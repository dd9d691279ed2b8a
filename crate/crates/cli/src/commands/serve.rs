//! `serve-retrieval`: index the corpus and serve it until interrupted.

use super::Context;
use crate::backends;
use anyhow::{Context as _, Result};
use claimcheck_core::retrieval::{serve, RetrievalConfig};
use std::net::SocketAddr;

pub fn run(ctx: &Context, addr: &str, k: Option<usize>) -> Result<u8> {
    let corpus_path = ctx.config.corpus_path()?;
    let k = k.unwrap_or(ctx.config.retrieval.k);
    if ctx.dry_run {
        println!(
            "would serve corpus {} on {addr} with k={k}",
            corpus_path.display()
        );
        return Ok(0);
    }
    let (index, corpus) = backends::build_corpus(corpus_path)?;
    let doc_count = corpus.count();
    let addr: SocketAddr = addr.parse().context("bad bind address")?;
    let handle = serve(index, corpus, addr, &RetrievalConfig { k })?;
    println!("serving {doc_count} passages at http://{}", handle.addr());
    loop {
        std::thread::park();
    }
}
