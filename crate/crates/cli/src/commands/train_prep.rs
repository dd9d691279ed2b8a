//! `train-prep`: rewarded groups in, training batch file out.

use super::Context;
use anyhow::{Context as _, Result};
use claimcheck_core::grpo::{assemble_batch, export_batch, BatchMetadata, Group};
use std::path::Path;

pub fn run(ctx: &Context, groups_path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(groups_path)
        .with_context(|| format!("cannot read {}", groups_path.display()))?;
    let groups: Vec<Group> =
        serde_json::from_str(&text).with_context(|| format!("bad groups file {}", groups_path.display()))?;
    if ctx.dry_run {
        let records: usize = groups.iter().map(|g| g.rollouts.len()).sum();
        println!(
            "would assemble {} groups ({records} records) into a batch file",
            groups.len()
        );
        return Ok(0);
    }
    let batch = assemble_batch(
        &groups,
        &ctx.config.grpo,
        BatchMetadata {
            agent_version: "unversioned".to_string(),
            data_segment_id: groups_path.display().to_string(),
        },
    )?;
    let path = ctx.out_dir()?.join("batch.jsonl");
    export_batch(&batch, &path)?;
    println!("{} records written to {}", batch.records.len(), path.display());
    Ok(0)
}
