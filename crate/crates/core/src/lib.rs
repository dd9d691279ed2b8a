//! Runtime for hierarchical two-agent claim verification.
//!
//! A high-level reasoning agent verifies claims by posing factual questions;
//! a low-level search agent answers them by iteratively querying a retrieval
//! index. This crate provides the tag protocol, retrieval, rollout engines,
//! outcome rewards, group-relative advantage/batch preparation for an
//! external trainer, training-data synthesis, the coordinated alternating
//! training scheduler, and the evaluation harness.

pub mod coordination;
pub mod eval;
pub mod grpo;
pub mod protocol;
pub mod retrieval;
pub mod reward;
pub mod rollout;
pub mod synthesis;

pub use protocol::{
    detect_pause, extract_verdict, parse_stream, validate_format, FormatReport, Origin,
    PauseAction, Role, Segment, SegmentKind, Span, TagKind, Transcript, Verdict,
};
pub use retrieval::{
    build_index, format_results, ingest_corpus, search, Corpus, LexicalIndex, Passage,
    RetrievalConfig, SearchHit,
};
pub use grpo::{
    assemble_batch, build_loss_mask, compute_advantages, export_batch, import_batch, AdvantageSet,
    GrpoConfig, Group, LossMaskSpan, TrainingBatch,
};
pub use reward::{reward_high, reward_low, JudgeRequest, JudgeScore, RewardBranch, RewardValue};
