//! `schedule`: plan the alternating-training phases, optionally executing
//! them against the stub trainer.

use super::Context;
use anyhow::{Context as _, Result};
use claimcheck_core::coordination::{
    execute, plan_schedule, register_bases, CheckpointRegistry, StubTrainer, StubWorker,
};
use claimcheck_core::eval::load_dataset;
use std::path::Path;

pub fn run(
    ctx: &Context,
    claims: Option<usize>,
    dataset: Option<&Path>,
    rounds: Option<u32>,
) -> Result<u8> {
    let rounds = rounds.unwrap_or(ctx.config.coordination.rounds);
    let total = match (claims, dataset) {
        (Some(n), _) => n,
        (None, Some(path)) => load_dataset(path)?.len(),
        (None, None) => anyhow::bail!("pass --claims or --dataset"),
    };
    let schedule = plan_schedule(total, rounds)?;
    println!(
        "{} phases over {total} claims, {rounds} rounds:",
        schedule.phases.len()
    );
    for phase in &schedule.phases {
        let output = match phase.output {
            Some((role, version)) => format!("-> {role:?} v{version}"),
            None => "-> question set".to_string(),
        };
        println!(
            "  phase {:>2}  {:<10} {:<4} (high v{}, low v{}) {output}",
            phase.index,
            format!("{:?}", phase.kind),
            phase.segment_id,
            phase.high_input,
            phase.low_input,
        );
    }
    if ctx.dry_run {
        return Ok(0);
    }
    let out = ctx.out_dir()?;
    let mut registry = CheckpointRegistry::open(&out.join("registry.jsonl"))?;
    let high_base = ctx.config.endpoints.high.as_deref().unwrap_or("stub://high/v0");
    let low_base = ctx.config.endpoints.low.as_deref().unwrap_or("stub://low/v0");
    register_bases(&mut registry, high_base, low_base)?;
    let artifact_dir = out.join("artifacts");
    std::fs::create_dir_all(&artifact_dir).context("cannot create artifact dir")?;
    let worker = StubWorker { dir: artifact_dir };
    let (low, high) = execute(
        &schedule,
        &StubTrainer,
        &worker,
        &mut registry,
        &out.join("journal.jsonl"),
    )?;
    println!(
        "finished: low v{} ({}), high v{} ({})",
        low.version, low.endpoint, high.version, high.endpoint
    );
    Ok(0)
}
