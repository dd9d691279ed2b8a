//! Outcome-based rewards with format gating, plus the usefulness judge.
//!
//! Both agents share the same three-way outcome: 1.0 for a correct outcome,
//! 0.1 for a wrong outcome in correct format, 0.0 for wrong format. The
//! search agent's outcome is decided by a judged usefulness score.

use crate::protocol::{validate_format, Role, Verdict};
use crate::rollout::{
    prompts, CompletionBackend, DecodingParams, ReasoningRollout, SearchRollout, Termination,
};
use serde::{Deserialize, Serialize};

/// Which branch of the reward cases fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardBranch {
    CorrectOutcome,
    WrongOutcomeGoodFormat,
    BadFormat,
}

/// A reward outcome; `value` and `branch` map bijectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardValue {
    pub value: f64,
    pub branch: RewardBranch,
}

impl RewardValue {
    fn from_branch(branch: RewardBranch) -> RewardValue {
        let value = match branch {
            RewardBranch::CorrectOutcome => 1.0,
            RewardBranch::WrongOutcomeGoodFormat => 0.1,
            RewardBranch::BadFormat => 0.0,
        };
        RewardValue { value, branch }
    }
}

/// Input fields of the judge prompt; all must be non-empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub question: String,
    pub ground_truth_answer: String,
    pub gathered_information: String,
}

/// Binary usefulness score with the raw judge output retained for audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeScore {
    pub s: u8,
    pub raw_output: String,
}

/// Reasoning-agent reward: format gate first, then verdict correctness.
pub fn reward_high(rollout: &ReasoningRollout, gold: Verdict) -> RewardValue {
    let good_format = rollout.termination == Termination::Completed
        && validate_format(&rollout.transcript, Role::Reasoning).valid();
    if !good_format {
        return RewardValue::from_branch(RewardBranch::BadFormat);
    }
    match rollout.verdict {
        Some(v) if v == gold => RewardValue::from_branch(RewardBranch::CorrectOutcome),
        _ => RewardValue::from_branch(RewardBranch::WrongOutcomeGoodFormat),
    }
}

/// Search-agent reward: format gate first, then the judged score threshold.
/// The threshold is literal `s > 0` so a graded judge can slot in later.
pub fn reward_low(rollout: &SearchRollout, score: &JudgeScore) -> RewardValue {
    if !search_format_valid(rollout) {
        return RewardValue::from_branch(RewardBranch::BadFormat);
    }
    if score.s > 0 {
        RewardValue::from_branch(RewardBranch::CorrectOutcome)
    } else {
        RewardValue::from_branch(RewardBranch::WrongOutcomeGoodFormat)
    }
}

/// Whether a search rollout passes the format gate. Callers use this to skip
/// judge calls entirely on the 0.0 branch.
pub fn search_format_valid(rollout: &SearchRollout) -> bool {
    rollout.termination == Termination::Completed
        && validate_format(&rollout.transcript, Role::Search).valid()
}

/// Convenience for the invalid-format path where no judge ran.
pub fn reward_low_unjudged(rollout: &SearchRollout) -> Option<RewardValue> {
    if search_format_valid(rollout) {
        None
    } else {
        Some(RewardValue::from_branch(RewardBranch::BadFormat))
    }
}

const JUDGE_RETRIES: u32 = 2;

/// Issues the judge prompt and parses the structured `is_useful` field:
/// score 1 iff the field value, lowercased, contains "yes".
///
/// Unparsable output after bounded retries conservatively maps to 0 with the
/// raw output retained and a warning logged.
pub fn judge(
    backend: &dyn CompletionBackend,
    request: &JudgeRequest,
    decoding: &DecodingParams,
) -> JudgeScore {
    let prompt = prompts::JUDGE_TEMPLATE
        .replace("{question}", &request.question)
        .replace("{ground_truth_answer}", &request.ground_truth_answer)
        .replace("{gathered_information}", &request.gathered_information);
    let mut raw_output = String::new();
    for _ in 0..=JUDGE_RETRIES {
        match backend.complete(&prompt, decoding) {
            Ok(completion) => {
                raw_output = completion.text;
                if let Some(value) = parse_is_useful(&raw_output) {
                    let s = u8::from(value.to_lowercase().contains("yes"));
                    return JudgeScore { s, raw_output };
                }
            }
            Err(e) => {
                raw_output = format!("<endpoint error: {e}>");
            }
        }
    }
    log::warn!("judge output unparsable after retries, scoring 0: {raw_output:?}");
    JudgeScore { s: 0, raw_output }
}

/// Extracts the `is_useful` field from the judge output: a JSON object when
/// the judge behaves, a labeled line otherwise.
pub fn parse_is_useful(output: &str) -> Option<String> {
    // whole output, or first JSON object embedded in it
    if let Some(value) = json_is_useful(output) {
        return Some(value);
    }
    if let (Some(start), Some(end)) = (output.find('{'), output.rfind('}')) {
        if start < end {
            if let Some(value) = json_is_useful(&output[start..=end]) {
                return Some(value);
            }
        }
    }
    let re = regex::Regex::new(r#"(?i)is_useful\s*[:=]\s*"?([A-Za-z.! ]+)"?"#).ok()?;
    re.captures(output)
        .map(|c| c.get(1).unwrap().as_str().trim().to_string())
}

fn json_is_useful(text: &str) -> Option<String> {
    let value: serde_json::Value = serde_json::from_str(text.trim()).ok()?;
    value.get("is_useful")?.as_str().map(|s| s.to_string())
}

/// Token-overlap F1 between a report and the reference answer: the
/// alternative scoring plug-in, feeding the same gate with `f1 > 0`.
pub fn token_overlap_f1(prediction: &str, reference: &str) -> f64 {
    let pred = crate::retrieval::analyze(prediction);
    let gold = crate::retrieval::analyze(reference);
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let mut gold_counts = std::collections::HashMap::new();
    for tok in &gold {
        *gold_counts.entry(tok.as_str()).or_insert(0u32) += 1;
    }
    let mut overlap = 0u32;
    for tok in &pred {
        if let Some(count) = gold_counts.get_mut(tok.as_str()) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = f64::from(overlap) / pred.len() as f64;
    let recall = f64::from(overlap) / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// F1-gated variant of the search-agent reward.
pub fn reward_low_f1(rollout: &SearchRollout, f1: f64) -> RewardValue {
    if !search_format_valid(rollout) {
        return RewardValue::from_branch(RewardBranch::BadFormat);
    }
    if f1 > 0.0 {
        RewardValue::from_branch(RewardBranch::CorrectOutcome)
    } else {
        RewardValue::from_branch(RewardBranch::WrongOutcomeGoodFormat)
    }
}

/// One line of the reward audit log.
pub fn audit_record(
    rollout_id: &str,
    role: Role,
    reward: &RewardValue,
    score: Option<&JudgeScore>,
) -> serde_json::Value {
    serde_json::json!({
        "rollout_id": rollout_id,
        "role": role,
        "branch": reward.branch,
        "value": reward.value,
        "s": score.map(|s| s.s),
        "raw_output": score.map(|s| s.raw_output.clone()),
    })
}
