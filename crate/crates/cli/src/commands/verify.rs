//! `verify`: one reasoning rollout over a claim.

use super::{termination_exit, Context};
use crate::backends;
use anyhow::Result;
use claimcheck_core::rollout::{
    dump_reasoning_rollout, run_reasoning_rollout, SearchAgentRunner,
};

pub fn run(ctx: &Context, claim: &str, dump: bool) -> Result<u8> {
    if ctx.dry_run {
        println!("would verify claim: {claim}");
        return Ok(0);
    }
    let high = backends::completion_backend(
        ctx.script.as_ref(),
        ctx.config.endpoints.high.as_deref(),
        "high-agent",
    )?;
    let low = backends::completion_backend(
        ctx.script.as_ref(),
        ctx.config.endpoints.low.as_deref(),
        "low-agent",
    )?;
    let retriever =
        backends::local_retriever(ctx.config.corpus_path()?, ctx.config.retrieval.k)?;
    let search_agent = SearchAgentRunner {
        backend: low.as_ref(),
        retriever: &retriever,
        limits: ctx.config.limits.clone(),
        decoding: ctx.decoding(),
    };
    let rollout = run_reasoning_rollout(
        high.as_ref(),
        &search_agent,
        claim,
        &ctx.config.limits,
        &ctx.decoding(),
    );
    match rollout.verdict {
        Some(verdict) => println!("{verdict}"),
        None => println!("no verdict ({:?})", rollout.termination),
    }
    if dump {
        let path = ctx.out_dir()?.join("verify-transcript.json");
        let record = dump_reasoning_rollout("verify-0", &rollout);
        std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
        println!("transcript written to {}", path.display());
    }
    Ok(termination_exit(rollout.termination))
}
