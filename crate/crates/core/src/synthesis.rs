//! Training-question synthesis for the search agent.
//!
//! Questions are sampled from reasoning-agent rollouts, paired with gold
//! evidence, answered by a generator endpoint, and filtered of pairs the
//! generator marked unanswerable.

use crate::rollout::prompts::SYNTHESIS_TEMPLATE;
use crate::rollout::{CompletionBackend, DecodingParams, ReasoningRollout};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ground-truth evidence for one claim.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "content")]
pub enum EvidenceBundle {
    /// Titled gold passages, flattened to "title: sentences" lines.
    GoldPassages(Vec<(String, String)>),
    /// A human-written explanation passed verbatim.
    HumanExplanation(String),
}

impl EvidenceBundle {
    pub fn is_empty(&self) -> bool {
        match self {
            EvidenceBundle::GoldPassages(p) => p.is_empty(),
            EvidenceBundle::HumanExplanation(e) => e.trim().is_empty(),
        }
    }

    /// Serializes the bundle for the synthesis prompt's evidence field.
    pub fn render(&self) -> String {
        match self {
            EvidenceBundle::GoldPassages(passages) => passages
                .iter()
                .map(|(title, sentences)| format!("{title}: {sentences}"))
                .collect::<Vec<_>>()
                .join("\n\n"),
            EvidenceBundle::HumanExplanation(text) => text.clone(),
        }
    }

    pub fn source_name(&self) -> &'static str {
        match self {
            EvidenceBundle::GoldPassages(_) => "gold_passages",
            EvidenceBundle::HumanExplanation(_) => "human_explanation",
        }
    }
}

/// One question chosen from a rollout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionSample {
    pub claim_id: String,
    pub question: String,
    /// Index of the question within its rollout's exchanges.
    pub position: usize,
    pub stage: u32,
}

/// A question with its generated pseudo ground-truth answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoQA {
    pub claim_id: String,
    pub question: String,
    pub rationale: String,
    pub answer: String,
}

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("synthesis input for claim {claim_id} has empty {field}")]
    EmptyInput { claim_id: String, field: &'static str },
    #[error("generator output unparsable after {attempts} attempts for claim {claim_id}")]
    Unparsable { claim_id: String, attempts: usize },
    #[error("generator endpoint failed: {0}")]
    Endpoint(#[from] crate::rollout::EndpointError),
}

/// Chooses at most one question per rollout. Stage 1 takes the first
/// question each rollout posed; later stages sample uniformly among each
/// rollout's questions with the seeded generator.
pub fn sample_questions(
    rollouts: &[(String, ReasoningRollout)],
    stage: u32,
    seed: u64,
) -> Vec<QuestionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for (claim_id, rollout) in rollouts {
        if rollout.exchanges.is_empty() {
            continue;
        }
        let position = if stage <= 1 {
            0
        } else {
            let indices: Vec<usize> = (0..rollout.exchanges.len()).collect();
            *indices.choose(&mut rng).expect("non-empty")
        };
        samples.push(QuestionSample {
            claim_id: claim_id.clone(),
            question: rollout.exchanges[position].0.clone(),
            position,
            stage,
        });
    }
    samples
}

fn render_prompt(claim: &str, veracity: bool, evidence: &EvidenceBundle, question: &str) -> String {
    SYNTHESIS_TEMPLATE
        .replace("{claim}", claim)
        .replace("{veracity}", if veracity { "true" } else { "false" })
        .replace("{evidence}", &evidence.render())
        .replace("{question}", question)
}

fn parse_qa(text: &str) -> Option<(String, String)> {
    let candidate = text.trim();
    let value: serde_json::Value = serde_json::from_str(candidate)
        .ok()
        .or_else(|| {
            let start = candidate.find('{')?;
            let end = candidate.rfind('}')?;
            serde_json::from_str(&candidate[start..=end]).ok()
        })?;
    let rationale = value.get("rationale")?.as_str()?.to_string();
    let answer = value.get("answer")?.as_str()?.to_string();
    if answer.trim().is_empty() {
        return None;
    }
    Some((rationale, answer))
}

const GENERATOR_RETRIES: usize = 2;

/// Obtains a pseudo ground-truth answer for one sampled question.
///
/// "None" answers are produced as-is; `filter_none` removes them later so
/// the removal rate can be reported over the whole pass.
pub fn generate_pseudo_answer(
    backend: &dyn CompletionBackend,
    claim: &str,
    veracity: bool,
    evidence: &EvidenceBundle,
    sample: &QuestionSample,
    decoding: &DecodingParams,
) -> Result<PseudoQA, SynthesisError> {
    for (value, field) in [
        (claim.trim().is_empty(), "claim"),
        (evidence.is_empty(), "evidence"),
        (sample.question.trim().is_empty(), "question"),
    ] {
        if value {
            return Err(SynthesisError::EmptyInput {
                claim_id: sample.claim_id.clone(),
                field,
            });
        }
    }
    let prompt = render_prompt(claim, veracity, evidence, &sample.question);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let completion = backend.complete(&prompt, decoding)?;
        if let Some((rationale, answer)) = parse_qa(&completion.text) {
            return Ok(PseudoQA {
                claim_id: sample.claim_id.clone(),
                question: sample.question.clone(),
                rationale,
                answer,
            });
        }
        if attempts > GENERATOR_RETRIES {
            return Err(SynthesisError::Unparsable {
                claim_id: sample.claim_id.clone(),
                attempts,
            });
        }
    }
}

fn is_none_marker(answer: &str) -> bool {
    answer
        .trim()
        .trim_end_matches(|c: char| c.is_ascii_punctuation())
        .trim()
        .eq_ignore_ascii_case("none")
}

/// Drops pairs whose answer is the none-marker (whitespace, trailing
/// punctuation, and case tolerant), preserving order. Returns the survivors
/// and the removal rate over the input.
pub fn filter_none(pairs: Vec<PseudoQA>) -> (Vec<PseudoQA>, f64) {
    let total = pairs.len();
    let kept: Vec<PseudoQA> = pairs
        .into_iter()
        .filter(|p| !is_none_marker(&p.answer))
        .collect();
    let rate = if total == 0 {
        0.0
    } else {
        (total - kept.len()) as f64 / total as f64
    };
    log::info!(
        "synthesis filter removed {} of {} pairs ({:.1}%)",
        total - kept.len(),
        total,
        rate * 100.0
    );
    (kept, rate)
}

/// One line of the synthesis output file.
pub fn output_record(pair: &PseudoQA, evidence: &EvidenceBundle, stage: u32) -> serde_json::Value {
    serde_json::json!({
        "claim_id": pair.claim_id,
        "question": pair.question,
        "rationale": pair.rationale,
        "answer": pair.answer,
        "evidence_source": evidence.source_name(),
        "stage": stage,
    })
}
