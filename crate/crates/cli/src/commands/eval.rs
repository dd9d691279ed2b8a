//! `eval`: benchmark the reasoning agent over a test split.

use super::Context;
use crate::backends;
use anyhow::Result;
use claimcheck_core::eval::{
    load_dataset, render_report, run_benchmark, stratified_sample,
};
use claimcheck_core::rollout::{dump_reasoning_rollout, SearchAgentRunner};
use std::io::Write as _;
use std::path::Path;

pub fn run(ctx: &Context, dataset: &Path, sample: Option<usize>) -> Result<u8> {
    let mut records = load_dataset(dataset)?;
    if let Some(n) = sample {
        records = stratified_sample(&records, n, ctx.seed)?;
    }
    if ctx.dry_run {
        println!("would evaluate {} claims from {}", records.len(), dataset.display());
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
    let (report, rollouts) = run_benchmark(
        &records,
        high.as_ref(),
        &search_agent,
        &ctx.config.limits,
        &ctx.decoding(),
    )?;
    print!("{}", render_report(&report));
    let out = ctx.out_dir()?;
    std::fs::write(
        out.join("eval-report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    let mut dumps = std::fs::File::create(out.join("eval-rollouts.jsonl"))?;
    for (id, rollout) in &rollouts {
        writeln!(dumps, "{}", dump_reasoning_rollout(id, rollout))?;
    }
    println!("report written to {}", out.join("eval-report.json").display());
    Ok(0)
}
