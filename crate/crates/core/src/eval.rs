//! Evaluation harness: dataset loading, balanced sampling, benchmark runs,
//! and accuracy / macro-F1 scoring with per-hop and per-dataset breakdowns.

use crate::protocol::Verdict;
use crate::rollout::{
    run_reasoning_rollout, CompletionBackend, DecodingParams, ReasoningRollout, RolloutLimits,
    SearchAgent,
};
use crate::synthesis::EvidenceBundle;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// One labeled claim from a verification dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub claim: String,
    pub label: Verdict,
    /// Reasoning depth of the claim, 2 to 4.
    pub hops: u8,
    pub dataset: String,
    /// Present on training splits only.
    pub evidence: Option<EvidenceBundle>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("dataset line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("dataset line {line}: hops must be 2 to 4, got {hops}")]
    BadHops { line: usize, hops: i64 },
    #[error("label class {label} has {available} records, need {needed}")]
    InsufficientClass {
        label: Verdict,
        available: usize,
        needed: usize,
    },
    #[error("no prediction for gold id {0}")]
    MissingPrediction(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Normalizes a dataset label string to a verdict. Accepts the verdict
/// names themselves, boolean veracity strings, and FEVER-style labels.
pub fn parse_label(raw: &str) -> Option<Verdict> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "support" | "supports" | "supported" | "true" => Some(Verdict::Support),
        "refute" | "refutes" | "refuted" | "false" => Some(Verdict::Refute),
        _ => None,
    }
}

pub fn load_dataset(path: &Path) -> Result<Vec<ClaimRecord>, EvalError> {
    let contents = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| EvalError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        let field = |name: &str| -> Result<String, EvalError> {
            value
                .get(name)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| EvalError::Malformed {
                    line: line_no,
                    message: format!("missing field {name:?}"),
                })
        };
        let raw_label = field("label")?;
        let label = parse_label(&raw_label).ok_or(EvalError::UnknownLabel {
            line: line_no,
            label: raw_label,
        })?;
        let hops = value
            .get("hops")
            .and_then(|v| v.as_i64())
            .ok_or_else(|| EvalError::Malformed {
                line: line_no,
                message: "missing field \"hops\"".to_string(),
            })?;
        if !(2..=4).contains(&hops) {
            return Err(EvalError::BadHops { line: line_no, hops });
        }
        let evidence = match value.get("evidence") {
            None | Some(serde_json::Value::Null) => None,
            Some(v) => Some(serde_json::from_value(v.clone()).map_err(|e| {
                EvalError::Malformed {
                    line: line_no,
                    message: format!("bad evidence: {e}"),
                }
            })?),
        };
        records.push(ClaimRecord {
            id: field("id")?,
            claim: field("claim")?,
            label,
            hops: hops as u8,
            dataset: field("dataset")?,
            evidence,
        });
    }
    Ok(records)
}

/// Draws n records with label counts differing by at most one,
/// deterministically for a fixed seed. For odd n the class receiving the
/// extra record is chosen by the seeded generator.
pub fn stratified_sample(
    records: &[ClaimRecord],
    n: usize,
    seed: u64,
) -> Result<Vec<ClaimRecord>, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support: Vec<&ClaimRecord> =
        records.iter().filter(|r| r.label == Verdict::Support).collect();
    let mut refute: Vec<&ClaimRecord> =
        records.iter().filter(|r| r.label == Verdict::Refute).collect();
    let (mut n_support, mut n_refute) = (n / 2, n / 2);
    if n % 2 == 1 {
        if rng.gen_bool(0.5) {
            n_support += 1;
        } else {
            n_refute += 1;
        }
    }
    for (pool, needed, label) in [
        (&mut support, n_support, Verdict::Support),
        (&mut refute, n_refute, Verdict::Refute),
    ] {
        if pool.len() < needed {
            return Err(EvalError::InsufficientClass {
                label,
                available: pool.len(),
                needed,
            });
        }
        pool.shuffle(&mut rng);
    }
    let mut out: Vec<ClaimRecord> = support
        .into_iter()
        .take(n_support)
        .chain(refute.into_iter().take(n_refute))
        .cloned()
        .collect();
    out.shuffle(&mut rng);
    Ok(out)
}

/// The verdict a rollout produced, or the absence of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prediction {
    Verdict(Verdict),
    /// No verdict was produced (format violation, limits, endpoint failure).
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub correct: usize,
    pub wrong: usize,
    pub format_failure: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubReport {
    pub total: usize,
    pub accuracy: f64,
    /// Absent when the gold pool contains a single class.
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: Option<f64>,
    pub counts: Counts,
    pub per_hop: BTreeMap<u8, SubReport>,
    pub per_dataset: BTreeMap<String, SubReport>,
    /// Which F1 averaging the report uses.
    pub f1_variant: String,
}

fn effective_verdict(prediction: Prediction, gold: Verdict) -> Verdict {
    match prediction {
        Prediction::Verdict(v) => v,
        // failures are scored pessimistically as the opposite class
        Prediction::Failure => match gold {
            Verdict::Support => Verdict::Refute,
            Verdict::Refute => Verdict::Support,
        },
    }
}

fn sub_metrics(items: &[(Verdict, Prediction)]) -> SubReport {
    let total = items.len();
    let mut tp = 0usize; // Support predicted Support
    let mut tn = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for &(gold, prediction) in items {
        let predicted = effective_verdict(prediction, gold);
        match (gold, predicted) {
            (Verdict::Support, Verdict::Support) => tp += 1,
            (Verdict::Refute, Verdict::Refute) => tn += 1,
            (Verdict::Refute, Verdict::Support) => fp += 1,
            (Verdict::Support, Verdict::Refute) => fn_ += 1,
        }
    }
    let accuracy = if total == 0 {
        0.0
    } else {
        (tp + tn) as f64 / total as f64
    };
    let single_class = items.iter().all(|(g, _)| *g == Verdict::Support)
        || items.iter().all(|(g, _)| *g == Verdict::Refute);
    let f1 = if single_class {
        None
    } else {
        let f1_of = |tp: usize, fp: usize, fn_: usize| {
            if tp == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fn_ as f64)
            }
        };
        // macro average over Support and Refute as the positive class
        Some((f1_of(tp, fp, fn_) + f1_of(tn, fn_, fp)) / 2.0)
    };
    SubReport {
        total,
        accuracy,
        f1,
    }
}

/// Scores predictions against gold labels. Every gold id needs an entry.
pub fn score(
    predictions: &BTreeMap<String, Prediction>,
    golds: &[ClaimRecord],
) -> Result<MetricsReport, EvalError> {
    let mut overall = Vec::with_capacity(golds.len());
    let mut per_hop: BTreeMap<u8, Vec<(Verdict, Prediction)>> = BTreeMap::new();
    let mut per_dataset: BTreeMap<String, Vec<(Verdict, Prediction)>> = BTreeMap::new();
    let mut counts = Counts::default();
    for gold in golds {
        let prediction = *predictions
            .get(&gold.id)
            .ok_or_else(|| EvalError::MissingPrediction(gold.id.clone()))?;
        match prediction {
            Prediction::Verdict(v) if v == gold.label => counts.correct += 1,
            Prediction::Verdict(_) => counts.wrong += 1,
            Prediction::Failure => {
                counts.wrong += 1;
                counts.format_failure += 1;
            }
        }
        overall.push((gold.label, prediction));
        per_hop.entry(gold.hops).or_default().push((gold.label, prediction));
        per_dataset
            .entry(gold.dataset.clone())
            .or_default()
            .push((gold.label, prediction));
    }
    let top = sub_metrics(&overall);
    Ok(MetricsReport {
        accuracy: top.accuracy,
        f1: top.f1,
        counts,
        per_hop: per_hop.iter().map(|(k, v)| (*k, sub_metrics(v))).collect(),
        per_dataset: per_dataset
            .iter()
            .map(|(k, v)| (k.clone(), sub_metrics(v)))
            .collect(),
        f1_variant: "macro".to_string(),
    })
}

/// Runs one reasoning rollout per claim and scores the outcomes. Rollouts
/// run on the shared worker pool; the report is order-independent.
pub fn run_benchmark(
    records: &[ClaimRecord],
    backend: &dyn CompletionBackend,
    search_agent: &dyn SearchAgent,
    limits: &RolloutLimits,
    decoding: &DecodingParams,
) -> Result<(MetricsReport, Vec<(String, ReasoningRollout)>), EvalError> {
    let rollouts: Vec<(String, ReasoningRollout)> = records
        .par_iter()
        .map(|record| {
            let rollout =
                run_reasoning_rollout(backend, search_agent, &record.claim, limits, decoding);
            (record.id.clone(), rollout)
        })
        .collect();
    let predictions: BTreeMap<String, Prediction> = rollouts
        .iter()
        .map(|(id, rollout)| {
            let prediction = match rollout.verdict {
                Some(v) => Prediction::Verdict(v),
                None => Prediction::Failure,
            };
            (id.clone(), prediction)
        })
        .collect();
    let report = score(&predictions, records)?;
    Ok((report, rollouts))
}

/// Renders the report as an aligned human-readable table.
pub fn render_report(report: &MetricsReport) -> String {
    let fmt_f1 = |f1: Option<f64>| match f1 {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    };
    let mut out = String::new();
    out.push_str(&format!(
        "overall      acc {:.4}  f1 {}  (correct {}, wrong {}, format failures {})\n",
        report.accuracy,
        fmt_f1(report.f1),
        report.counts.correct,
        report.counts.wrong,
        report.counts.format_failure,
    ));
    for (hops, sub) in &report.per_hop {
        out.push_str(&format!(
            "hops {hops}       acc {:.4}  f1 {}  (n {})\n",
            sub.accuracy,
            fmt_f1(sub.f1),
            sub.total
        ));
    }
    for (dataset, sub) in &report.per_dataset {
        out.push_str(&format!(
            "{dataset:<12} acc {:.4}  f1 {}  (n {})\n",
            sub.accuracy,
            fmt_f1(sub.f1),
            sub.total
        ));
    }
    out
}
