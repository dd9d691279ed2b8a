//! `synth`: build the search agent's QA training set from a train split.

use super::Context;
use crate::backends;
use anyhow::{Context as _, Result};
use claimcheck_core::eval::load_dataset;
use claimcheck_core::protocol::Verdict;
use claimcheck_core::rollout::{run_reasoning_rollout, SearchAgentRunner};
use claimcheck_core::synthesis::{
    filter_none, generate_pseudo_answer, output_record, sample_questions,
};
use std::io::Write as _;
use std::path::Path;

pub fn run(ctx: &Context, dataset: &Path, stage: u32) -> Result<u8> {
    let records = load_dataset(dataset)?;
    if ctx.dry_run {
        println!(
            "would synthesize stage-{stage} questions from {} claims in {}",
            records.len(),
            dataset.display()
        );
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
    let generator = backends::completion_backend(
        ctx.script.as_ref(),
        ctx.config.endpoints.synthesis.as_deref(),
        "synthesis",
    )?;
    let retriever =
        backends::local_retriever(ctx.config.corpus_path()?, ctx.config.retrieval.k)?;
    let search_agent = SearchAgentRunner {
        backend: low.as_ref(),
        retriever: &retriever,
        limits: ctx.config.limits.clone(),
        decoding: ctx.decoding(),
    };

    let rollouts: Vec<_> = records
        .iter()
        .map(|record| {
            let rollout = run_reasoning_rollout(
                high.as_ref(),
                &search_agent,
                &record.claim,
                &ctx.config.limits,
                &ctx.decoding(),
            );
            (record.id.clone(), rollout)
        })
        .collect();
    let samples = sample_questions(&rollouts, stage, ctx.seed);

    let mut pairs = Vec::new();
    let mut evidence_by_claim = std::collections::BTreeMap::new();
    for sample in &samples {
        let record = records
            .iter()
            .find(|r| r.id == sample.claim_id)
            .expect("sample comes from records");
        let evidence = record
            .evidence
            .clone()
            .with_context(|| format!("claim {} has no evidence", record.id))?;
        match generate_pseudo_answer(
            generator.as_ref(),
            &record.claim,
            record.label == Verdict::Support,
            &evidence,
            sample,
            &ctx.decoding(),
        ) {
            Ok(pair) => {
                evidence_by_claim.insert(pair.claim_id.clone(), evidence);
                pairs.push(pair);
            }
            Err(e) => {
                log::warn!("dropping sample for claim {}: {e}", sample.claim_id);
            }
        }
    }
    let (kept, removal_rate) = filter_none(pairs);

    let path = ctx.out_dir()?.join(format!("synthesis-stage{stage}.jsonl"));
    let mut file = std::fs::File::create(&path)?;
    for pair in &kept {
        let evidence = &evidence_by_claim[&pair.claim_id];
        writeln!(file, "{}", output_record(pair, evidence, stage))?;
    }
    println!(
        "{} pairs written to {} (removal rate {:.1}%)",
        kept.len(),
        path.display(),
        removal_rate * 100.0
    );
    Ok(0)
}
