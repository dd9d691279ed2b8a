//! Trainer-facing material: group-relative normalized advantages, loss masks
//! excluding system-injected content, and the serialized training batch.
//!
//! The KL term and probability ratios of the policy objective live in the
//! external trainer; this module carries the KL coefficient and
//! learning-rate hint as metadata only.

use crate::protocol::{Origin, Role, Transcript};
use crate::rollout::Termination;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const BATCH_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrpoConfig {
    pub group_size: usize,
    pub kl_coefficient: f64,
    pub std_epsilon: f64,
    pub batch_size: usize,
    /// Passed through to trainer metadata, not used here.
    pub learning_rate_hint: f64,
}

impl Default for GrpoConfig {
    fn default() -> Self {
        GrpoConfig {
            group_size: 5,
            kl_coefficient: 0.001,
            std_epsilon: 1e-6,
            batch_size: 48,
            learning_rate_hint: 1e-6,
        }
    }
}

/// One rollout flattened to what the trainer needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub rollout_id: String,
    pub role: Role,
    pub prompt: String,
    pub transcript: Transcript,
    pub termination: Termination,
}

/// G same-input rollouts with their aligned rewards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Group {
    pub group_id: String,
    pub input: String,
    pub rollouts: Vec<RolloutRecord>,
    pub rewards: Vec<f64>,
}

/// Per-rollout scalar advantages; each one is broadcast uniformly to every
/// generated token of its rollout by the trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageSet {
    pub per_rollout: Vec<f64>,
}

/// A contiguous byte interval of the trainer-visible sequence
/// (prompt followed by transcript raw text) with its loss eligibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossMaskSpan {
    pub start: usize,
    pub end: usize,
    pub include_in_loss: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub agent_version: String,
    pub data_segment_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchRecord {
    pub group_id: String,
    pub rollout_id: String,
    pub role: Role,
    pub prompt: String,
    pub text: String,
    pub mask_spans: Vec<LossMaskSpan>,
    pub advantage: f64,
    pub reward: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingBatch {
    pub records: Vec<BatchRecord>,
    pub config: GrpoConfig,
    pub metadata: BatchMetadata,
}

#[derive(Debug, Error)]
pub enum GrpoError {
    #[error("group has {rewards} rewards for {rollouts} rollouts")]
    Unrewarded { rollouts: usize, rewards: usize },
    #[error("expected group size {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("record {rollout_id} has no mask spans")]
    EmptyMask { rollout_id: String },
    #[error("batch file schema version {found}, this build reads {expected}")]
    Version { found: u32, expected: u32 },
    #[error("batch file line {line} is malformed: {message}")]
    Malformed { line: usize, message: String },
    #[error("batch file is truncated or missing its header")]
    Truncated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Group-relative advantage normalization:
/// `(r_i - mean(r)) / (std_pop(r) + epsilon)`.
///
/// Constant-reward groups yield exact zeros: a group with no signal should
/// produce no gradient pressure, not 0/epsilon noise.
pub fn compute_advantages(rewards: &[f64], config: &GrpoConfig) -> Result<AdvantageSet, GrpoError> {
    if rewards.len() != config.group_size || rewards.len() < 2 {
        return Err(GrpoError::SizeMismatch {
            expected: config.group_size,
            got: rewards.len(),
        });
    }
    if rewards.iter().all(|r| *r == rewards[0]) {
        return Ok(AdvantageSet {
            per_rollout: vec![0.0; rewards.len()],
        });
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let variance = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = variance.sqrt();
    Ok(AdvantageSet {
        per_rollout: rewards
            .iter()
            .map(|r| (r - mean) / (std + config.std_epsilon))
            .collect(),
    })
}

/// Builds the loss mask over the trainer-visible sequence: the prompt region
/// and every system-injected result block are excluded, everything the agent
/// generated (tags included) is kept. Adjacent spans with the same
/// eligibility are merged.
pub fn build_loss_mask(transcript: &Transcript, prompt_length: usize) -> Vec<LossMaskSpan> {
    let mut spans = Vec::new();
    let push = |start: usize, end: usize, include: bool, spans: &mut Vec<LossMaskSpan>| {
        if start == end {
            return;
        }
        if let Some(last) = spans.last_mut() {
            let last: &mut LossMaskSpan = last;
            if last.end == start && last.include_in_loss == include {
                last.end = end;
                return;
            }
        }
        spans.push(LossMaskSpan {
            start,
            end,
            include_in_loss: include,
        });
    };
    push(0, prompt_length, false, &mut spans);
    for seg in transcript.segments() {
        let include = seg.origin != Origin::SystemInjected;
        push(
            prompt_length + seg.span.start,
            prompt_length + seg.span.end,
            include,
            &mut spans,
        );
    }
    spans
}

/// Assembles rewarded groups into a deterministic batch: records ordered by
/// group id, then rollout index.
pub fn assemble_batch(
    groups: &[Group],
    config: &GrpoConfig,
    metadata: BatchMetadata,
) -> Result<TrainingBatch, GrpoError> {
    let mut ordered: Vec<&Group> = groups.iter().collect();
    ordered.sort_by(|a, b| a.group_id.cmp(&b.group_id));
    let mut records = Vec::new();
    for group in ordered {
        if group.rewards.len() != group.rollouts.len() {
            return Err(GrpoError::Unrewarded {
                rollouts: group.rollouts.len(),
                rewards: group.rewards.len(),
            });
        }
        let advantages = compute_advantages(&group.rewards, config)?;
        for (i, rollout) in group.rollouts.iter().enumerate() {
            records.push(BatchRecord {
                group_id: group.group_id.clone(),
                rollout_id: rollout.rollout_id.clone(),
                role: rollout.role,
                prompt: rollout.prompt.clone(),
                text: rollout.transcript.raw().to_string(),
                mask_spans: build_loss_mask(&rollout.transcript, rollout.prompt.len()),
                advantage: advantages.per_rollout[i],
                reward: group.rewards[i],
                termination: rollout.termination,
            });
        }
    }
    Ok(TrainingBatch {
        records,
        config: config.clone(),
        metadata,
    })
}

#[derive(Serialize, Deserialize)]
struct BatchHeader {
    schema_version: u32,
    config: GrpoConfig,
    metadata: BatchMetadata,
}

#[derive(Serialize, Deserialize)]
struct WireRecord {
    group_id: String,
    rollout_id: String,
    role: Role,
    prompt: String,
    text: String,
    /// `[start, end, include]` triples.
    mask_spans: Vec<(usize, usize, bool)>,
    advantage: f64,
    reward: f64,
    termination: Termination,
}

/// Writes the batch file: one metadata header line, then one record line per
/// rollout. The write is atomic (temp file then rename).
pub fn export_batch(batch: &TrainingBatch, path: &Path) -> Result<(), GrpoError> {
    for record in &batch.records {
        if record.mask_spans.is_empty() {
            return Err(GrpoError::EmptyMask {
                rollout_id: record.rollout_id.clone(),
            });
        }
    }
    let mut out = String::new();
    let header = BatchHeader {
        schema_version: BATCH_SCHEMA_VERSION,
        config: batch.config.clone(),
        metadata: batch.metadata.clone(),
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for record in &batch.records {
        let wire = WireRecord {
            group_id: record.group_id.clone(),
            rollout_id: record.rollout_id.clone(),
            role: record.role,
            prompt: record.prompt.clone(),
            text: record.text.clone(),
            mask_spans: record
                .mask_spans
                .iter()
                .map(|s| (s.start, s.end, s.include_in_loss))
                .collect(),
            advantage: record.advantage,
            reward: record.reward,
            termination: record.termination,
        };
        out.push_str(&serde_json::to_string(&wire).expect("record serializes"));
        out.push('\n');
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, out)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn import_batch(path: &Path) -> Result<TrainingBatch, GrpoError> {
    let contents = std::fs::read_to_string(path)?;
    let mut lines = contents.lines().enumerate();
    let Some((_, header_line)) = lines.next() else {
        return Err(GrpoError::Truncated);
    };
    let header: BatchHeader =
        serde_json::from_str(header_line).map_err(|e| GrpoError::Malformed {
            line: 1,
            message: e.to_string(),
        })?;
    if header.schema_version != BATCH_SCHEMA_VERSION {
        return Err(GrpoError::Version {
            found: header.schema_version,
            expected: BATCH_SCHEMA_VERSION,
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireRecord = serde_json::from_str(line).map_err(|e| GrpoError::Malformed {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(BatchRecord {
            group_id: wire.group_id,
            rollout_id: wire.rollout_id,
            role: wire.role,
            prompt: wire.prompt,
            text: wire.text,
            mask_spans: wire
                .mask_spans
                .into_iter()
                .map(|(start, end, include_in_loss)| LossMaskSpan {
                    start,
                    end,
                    include_in_loss,
                })
                .collect(),
            advantage: wire.advantage,
            reward: wire.reward,
            termination: wire.termination,
        });
    }
    Ok(TrainingBatch {
        records,
        config: header.config,
        metadata: header.metadata,
    })
}

/// The generated region's excluded sub-spans, for checking against a
/// segment-origin walk.
pub fn excluded_generated_spans(spans: &[LossMaskSpan], prompt_length: usize) -> Vec<(usize, usize)> {
    spans
        .iter()
        .filter(|s| !s.include_in_loss && s.start >= prompt_length)
        .map(|s| (s.start - prompt_length, s.end - prompt_length))
        .collect()
}
