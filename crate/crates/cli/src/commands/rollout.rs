//! `rollout`: a sampling group over one claim or question.

use super::{termination_exit, Context};
use crate::backends;
use anyhow::{bail, Result};
use claimcheck_core::rollout::{
    dump_reasoning_rollout, dump_search_rollout, run_group, run_reasoning_rollout,
    run_search_rollout, SearchAgentRunner, Termination,
};
use std::io::Write as _;

pub fn run(
    ctx: &Context,
    claim: Option<&str>,
    question: Option<&str>,
    group_size: Option<usize>,
) -> Result<u8> {
    let group_size = group_size.unwrap_or(ctx.config.grpo.group_size);
    let (role, input) = match (claim, question) {
        (Some(c), None) => ("reasoning", c),
        (None, Some(q)) => ("search", q),
        _ => bail!("pass exactly one of --claim or --question"),
    };
    if ctx.dry_run {
        println!("would run a {role} group of {group_size} over: {input}");
        return Ok(0);
    }
    let backend = backends::completion_backend(
        ctx.script.as_ref(),
        match role {
            "reasoning" => ctx.config.endpoints.high.as_deref(),
            _ => ctx.config.endpoints.low.as_deref(),
        },
        role,
    )?;
    let low = backends::completion_backend(
        ctx.script.as_ref(),
        ctx.config.endpoints.low.as_deref(),
        "low-agent",
    )?;
    let retriever =
        backends::local_retriever(ctx.config.corpus_path()?, ctx.config.retrieval.k)?;
    let limits = ctx.config.limits.clone();
    let decoding = ctx.decoding();

    let (records, terminations): (Vec<serde_json::Value>, Vec<Termination>) = if role == "search" {
        let rollouts = run_group(group_size, |i| {
            let rollout = run_search_rollout(backend.as_ref(), &retriever, input, &limits, &decoding);
            (format!("search-{i}"), rollout)
        })?;
        rollouts
            .iter()
            .map(|(id, r)| (dump_search_rollout(id, r), r.termination))
            .unzip()
    } else {
        let search_agent = SearchAgentRunner {
            backend: low.as_ref(),
            retriever: &retriever,
            limits: limits.clone(),
            decoding: decoding.clone(),
        };
        let rollouts = run_group(group_size, |i| {
            let rollout =
                run_reasoning_rollout(backend.as_ref(), &search_agent, input, &limits, &decoding);
            (format!("reasoning-{i}"), rollout)
        })?;
        rollouts
            .iter()
            .map(|(id, r)| (dump_reasoning_rollout(id, r), r.termination))
            .unzip()
    };

    let path = ctx.out_dir()?.join(format!("{role}-group.jsonl"));
    let mut file = std::fs::File::create(&path)?;
    for record in &records {
        writeln!(file, "{record}")?;
    }
    for (i, termination) in terminations.iter().enumerate() {
        println!("rollout {i}: {termination:?}");
    }
    println!("dumps written to {}", path.display());
    let worst = terminations
        .iter()
        .copied()
        .max_by_key(|t| termination_exit(*t))
        .unwrap_or(Termination::Completed);
    Ok(termination_exit(worst))
}
