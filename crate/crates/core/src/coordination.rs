//! Alternating-training scheduler for the two agents.
//!
//! A foundation block trains both agents on the full claim set, then N
//! rounds alternate over disjoint claim segments: synthesize questions with
//! the current high agent, train the low agent on them, then train the high
//! agent against the newly trained low agent. Actual weight updates happen
//! in an external trainer behind [`Trainer`]; this module owns ordering,
//! checkpoint versioning, and crash recovery through an append-only journal.

use chrono::Utc;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    High,
    Low,
}

/// A trained (or base) model version with its serving endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub role: AgentRole,
    /// Version 0 is the untrained base model.
    pub version: u32,
    pub endpoint: String,
    /// Which phase produced this checkpoint ("base" for version 0).
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Synthesize,
    TrainLow,
    TrainHigh,
}

/// One step of the schedule with its data segment and version wiring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub index: usize,
    pub kind: PhaseKind,
    pub segment_id: String,
    /// High-agent version read by this phase.
    pub high_input: u32,
    /// Low-agent version read by this phase (unused by Synthesize).
    pub low_input: u32,
    /// Role and version of the checkpoint this phase produces, if any.
    pub output: Option<(AgentRole, u32)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule {
    pub phases: Vec<Phase>,
    pub rounds: u32,
    /// Segment id to the claim indices it covers; "T" is the full set.
    pub segments: BTreeMap<String, (usize, usize)>,
}

#[derive(Debug, Error)]
pub enum CoordError {
    #[error("cannot partition {len} items into {n} segments")]
    InvalidPartition { len: usize, n: usize },
    #[error("checkpoint {role:?} v{version} is not registered")]
    MissingCheckpoint { role: AgentRole, version: u32 },
    #[error("trainer returned {role:?} v{got}, expected v{expected}")]
    VersionSkew { role: AgentRole, expected: u32, got: u32 },
    #[error("trainer failed in phase {phase}: {message}")]
    Trainer { phase: usize, message: String },
    #[error("phase {phase} needs the question file of phase {wanted}, which has not run")]
    MissingQuestions { phase: usize, wanted: usize },
    #[error("journal line {line} is malformed: {message}")]
    MalformedJournal { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Splits items into `n` contiguous, order-preserving segments with sizes
/// differing by at most one (larger segments first).
pub fn partition<T>(items: &[T], n: usize) -> Result<Vec<&[T]>, CoordError> {
    if n == 0 || n > items.len() {
        return Err(CoordError::InvalidPartition {
            len: items.len(),
            n,
        });
    }
    let base = items.len() / n;
    let extra = items.len() % n;
    let mut segments = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let size = base + usize::from(i < extra);
        segments.push(&items[start..start + size]);
        start += size;
    }
    Ok(segments)
}

/// Plans the full phase sequence: a foundation block over the whole set,
/// then one block per round over its segment. 3(N+1) phases total, ending
/// at versions L_{N+1} and H_{N+1}.
pub fn plan_schedule(total_claims: usize, rounds: u32) -> Result<Schedule, CoordError> {
    let n = rounds as usize;
    if n == 0 {
        return Err(CoordError::InvalidPartition {
            len: total_claims,
            n,
        });
    }
    let indices: Vec<usize> = (0..total_claims).collect();
    let parts = partition(&indices, n)?;
    let mut segments = BTreeMap::new();
    segments.insert("T".to_string(), (0, total_claims));
    for (i, part) in parts.iter().enumerate() {
        segments.insert(format!("T{}", i + 1), (part[0], part[part.len() - 1] + 1));
    }
    let mut phases = Vec::new();
    // block b = 0 is the foundation over T with H_b; blocks 1..=N are rounds
    for b in 0..=rounds {
        let segment_id = if b == 0 {
            "T".to_string()
        } else {
            format!("T{b}")
        };
        let idx = phases.len();
        phases.push(Phase {
            index: idx,
            kind: PhaseKind::Synthesize,
            segment_id: segment_id.clone(),
            high_input: b,
            low_input: b,
            output: None,
        });
        phases.push(Phase {
            index: idx + 1,
            kind: PhaseKind::TrainLow,
            segment_id: segment_id.clone(),
            high_input: b,
            low_input: b,
            output: Some((AgentRole::Low, b + 1)),
        });
        phases.push(Phase {
            index: idx + 2,
            kind: PhaseKind::TrainHigh,
            segment_id,
            high_input: b,
            low_input: b + 1,
            output: Some((AgentRole::High, b + 1)),
        });
    }
    Ok(Schedule {
        phases,
        rounds,
        segments,
    })
}

/// Seam to the external GRPO trainer.
pub trait Trainer {
    fn submit(
        &self,
        batch_path: &Path,
        role: AgentRole,
        base: &AgentCheckpoint,
    ) -> Result<AgentCheckpoint, String>;
}

/// Desk-scale trainer: returns the next version immediately.
pub struct StubTrainer;

impl Trainer for StubTrainer {
    fn submit(
        &self,
        _batch_path: &Path,
        role: AgentRole,
        base: &AgentCheckpoint,
    ) -> Result<AgentCheckpoint, String> {
        let version = base.version + 1;
        Ok(AgentCheckpoint {
            role,
            version,
            endpoint: format!("stub://{role:?}/v{version}").to_lowercase(),
            provenance: String::new(),
        })
    }
}

/// Produces the data artifacts each phase needs: a synthesized question
/// file, or a training batch file for one of the agents.
pub trait PhaseWorker {
    fn synthesize(&self, segment_id: &str, high: &AgentCheckpoint) -> Result<PathBuf, String>;
    fn low_batch(&self, questions: &Path, low: &AgentCheckpoint) -> Result<PathBuf, String>;
    fn high_batch(
        &self,
        segment_id: &str,
        high: &AgentCheckpoint,
        collaborator: &AgentCheckpoint,
    ) -> Result<PathBuf, String>;
}

/// Desk-scale worker writing placeholder artifacts into one directory.
pub struct StubWorker {
    pub dir: PathBuf,
}

impl PhaseWorker for StubWorker {
    fn synthesize(&self, segment_id: &str, high: &AgentCheckpoint) -> Result<PathBuf, String> {
        let path = self.dir.join(format!("questions-{segment_id}-h{}.jsonl", high.version));
        std::fs::write(&path, "").map_err(|e| e.to_string())?;
        Ok(path)
    }

    fn low_batch(&self, questions: &Path, low: &AgentCheckpoint) -> Result<PathBuf, String> {
        let stem = questions.file_stem().and_then(|s| s.to_str()).unwrap_or("q");
        let path = self.dir.join(format!("low-batch-{stem}-l{}.jsonl", low.version));
        std::fs::write(&path, "").map_err(|e| e.to_string())?;
        Ok(path)
    }

    fn high_batch(
        &self,
        segment_id: &str,
        high: &AgentCheckpoint,
        collaborator: &AgentCheckpoint,
    ) -> Result<PathBuf, String> {
        let path = self.dir.join(format!(
            "high-batch-{segment_id}-h{}-l{}.jsonl",
            high.version, collaborator.version
        ));
        std::fs::write(&path, "").map_err(|e| e.to_string())?;
        Ok(path)
    }
}

/// File-backed checkpoint registry, one JSON record per line.
pub struct CheckpointRegistry {
    path: PathBuf,
    checkpoints: Vec<AgentCheckpoint>,
}

impl CheckpointRegistry {
    pub fn open(path: &Path) -> Result<Self, CoordError> {
        let mut checkpoints = Vec::new();
        if path.exists() {
            for (idx, line) in std::fs::read_to_string(path)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let ckpt: AgentCheckpoint =
                    serde_json::from_str(line).map_err(|e| CoordError::MalformedJournal {
                        line: idx + 1,
                        message: e.to_string(),
                    })?;
                checkpoints.push(ckpt);
            }
        }
        Ok(CheckpointRegistry {
            path: path.to_path_buf(),
            checkpoints,
        })
    }

    pub fn register(&mut self, ckpt: AgentCheckpoint) -> Result<(), CoordError> {
        if self.get(ckpt.role, ckpt.version).is_some() {
            return Ok(());
        }
        if let Some(latest) = self.latest(ckpt.role) {
            if ckpt.version != latest.version + 1 {
                return Err(CoordError::VersionSkew {
                    role: ckpt.role,
                    expected: latest.version + 1,
                    got: ckpt.version,
                });
            }
        }
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(file, "{}", serde_json::to_string(&ckpt).expect("serializes"))?;
        self.checkpoints.push(ckpt);
        Ok(())
    }

    pub fn get(&self, role: AgentRole, version: u32) -> Option<&AgentCheckpoint> {
        self.checkpoints
            .iter()
            .find(|c| c.role == role && c.version == version)
    }

    pub fn latest(&self, role: AgentRole) -> Option<&AgentCheckpoint> {
        self.checkpoints
            .iter()
            .filter(|c| c.role == role)
            .max_by_key(|c| c.version)
    }

    pub fn versions(&self, role: AgentRole) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .checkpoints
            .iter()
            .filter(|c| c.role == role)
            .map(|c| c.version)
            .collect();
        v.sort_unstable();
        v
    }
}

/// One completed phase in the journal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JournalEntry {
    pub phase_index: usize,
    pub kind: PhaseKind,
    pub segment_id: String,
    pub high_input: u32,
    pub low_input: u32,
    pub output_version: Option<(AgentRole, u32)>,
    /// Low-agent version serving as search collaborator (TrainHigh only).
    pub collaborator_low: Option<u32>,
    pub artifact_path: String,
    pub status: String,
    pub started_at: String,
    pub finished_at: String,
}

fn read_journal(path: &Path) -> Result<Vec<JournalEntry>, CoordError> {
    let mut entries = Vec::new();
    if path.exists() {
        for (idx, line) in std::fs::read_to_string(path)?.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: JournalEntry =
                serde_json::from_str(line).map_err(|e| CoordError::MalformedJournal {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            entries.push(entry);
        }
    }
    Ok(entries)
}

fn append_journal(path: &Path, entry: &JournalEntry) -> Result<(), CoordError> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(file, "{}", serde_json::to_string(entry).expect("serializes"))?;
    Ok(())
}

/// Runs the schedule strictly in order, skipping phases the journal already
/// records as completed. Returns the final (low, high) checkpoints.
///
/// A trainer or worker failure halts before journaling the phase, so a
/// rerun resumes exactly there.
pub fn execute(
    schedule: &Schedule,
    trainer: &dyn Trainer,
    worker: &dyn PhaseWorker,
    registry: &mut CheckpointRegistry,
    journal_path: &Path,
) -> Result<(AgentCheckpoint, AgentCheckpoint), CoordError> {
    let journal = read_journal(journal_path)?;
    let mut questions: BTreeMap<usize, PathBuf> = journal
        .iter()
        .filter(|e| e.kind == PhaseKind::Synthesize)
        .map(|e| (e.phase_index, PathBuf::from(&e.artifact_path)))
        .collect();
    let completed: std::collections::BTreeSet<usize> = journal
        .iter()
        .filter(|e| e.status == "completed")
        .map(|e| e.phase_index)
        .collect();

    for phase in &schedule.phases {
        if completed.contains(&phase.index) {
            continue;
        }
        let started_at = Utc::now().to_rfc3339();
        let high = registry
            .get(AgentRole::High, phase.high_input)
            .cloned()
            .ok_or(CoordError::MissingCheckpoint {
                role: AgentRole::High,
                version: phase.high_input,
            })?;
        let (artifact, produced, collaborator_low) = match phase.kind {
            PhaseKind::Synthesize => {
                let path = worker
                    .synthesize(&phase.segment_id, &high)
                    .map_err(|message| CoordError::Trainer {
                        phase: phase.index,
                        message,
                    })?;
                questions.insert(phase.index, path.clone());
                (path, None, None)
            }
            PhaseKind::TrainLow => {
                let low = registry
                    .get(AgentRole::Low, phase.low_input)
                    .cloned()
                    .ok_or(CoordError::MissingCheckpoint {
                        role: AgentRole::Low,
                        version: phase.low_input,
                    })?;
                let question_path =
                    questions
                        .get(&(phase.index - 1))
                        .ok_or(CoordError::MissingQuestions {
                            phase: phase.index,
                            wanted: phase.index - 1,
                        })?;
                let batch = worker.low_batch(question_path, &low).map_err(|message| {
                    CoordError::Trainer {
                        phase: phase.index,
                        message,
                    }
                })?;
                let mut ckpt =
                    trainer
                        .submit(&batch, AgentRole::Low, &low)
                        .map_err(|message| CoordError::Trainer {
                            phase: phase.index,
                            message,
                        })?;
                if ckpt.version != low.version + 1 {
                    return Err(CoordError::VersionSkew {
                        role: AgentRole::Low,
                        expected: low.version + 1,
                        got: ckpt.version,
                    });
                }
                ckpt.provenance = format!("phase-{}", phase.index);
                registry.register(ckpt.clone())?;
                (batch, Some(ckpt), None)
            }
            PhaseKind::TrainHigh => {
                // always the newest low: the one this block just produced
                let collaborator = registry
                    .get(AgentRole::Low, phase.low_input)
                    .cloned()
                    .ok_or(CoordError::MissingCheckpoint {
                        role: AgentRole::Low,
                        version: phase.low_input,
                    })?;
                let batch = worker
                    .high_batch(&phase.segment_id, &high, &collaborator)
                    .map_err(|message| CoordError::Trainer {
                        phase: phase.index,
                        message,
                    })?;
                let mut ckpt = trainer
                    .submit(&batch, AgentRole::High, &high)
                    .map_err(|message| CoordError::Trainer {
                        phase: phase.index,
                        message,
                    })?;
                if ckpt.version != high.version + 1 {
                    return Err(CoordError::VersionSkew {
                        role: AgentRole::High,
                        expected: high.version + 1,
                        got: ckpt.version,
                    });
                }
                ckpt.provenance = format!("phase-{}", phase.index);
                registry.register(ckpt.clone())?;
                (batch, Some(ckpt), Some(collaborator.version))
            }
        };
        append_journal(
            journal_path,
            &JournalEntry {
                phase_index: phase.index,
                kind: phase.kind,
                segment_id: phase.segment_id.clone(),
                high_input: phase.high_input,
                low_input: phase.low_input,
                output_version: produced.as_ref().map(|c| (c.role, c.version)),
                collaborator_low,
                artifact_path: artifact.display().to_string(),
                status: "completed".to_string(),
                started_at,
                finished_at: Utc::now().to_rfc3339(),
            },
        )?;
    }

    let final_low = registry
        .latest(AgentRole::Low)
        .cloned()
        .ok_or(CoordError::MissingCheckpoint {
            role: AgentRole::Low,
            version: schedule.rounds + 1,
        })?;
    let final_high = registry
        .latest(AgentRole::High)
        .cloned()
        .ok_or(CoordError::MissingCheckpoint {
            role: AgentRole::High,
            version: schedule.rounds + 1,
        })?;
    Ok((final_low, final_high))
}

/// Registers the version-0 base checkpoints for both agents.
pub fn register_bases(
    registry: &mut CheckpointRegistry,
    high_endpoint: &str,
    low_endpoint: &str,
) -> Result<(), CoordError> {
    for (role, endpoint) in [(AgentRole::High, high_endpoint), (AgentRole::Low, low_endpoint)] {
        if registry.get(role, 0).is_none() {
            registry.register(AgentCheckpoint {
                role,
                version: 0,
                endpoint: endpoint.to_string(),
                provenance: "base".to_string(),
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_even_and_uneven() {
        let big: Vec<usize> = (0..7200).collect();
        let parts = partition(&big, 3).unwrap();
        assert_eq!(
            parts.iter().map(|p| p.len()).collect::<Vec<_>>(),
            vec![2400, 2400, 2400]
        );
        let small: Vec<usize> = (0..10).collect();
        let parts = partition(&small, 3).unwrap();
        assert_eq!(
            parts.iter().map(|p| p.len()).collect::<Vec<_>>(),
            vec![4, 3, 3]
        );
    }

    #[test]
    fn partition_covers_disjointly() {
        let items: Vec<usize> = (0..137).collect();
        for n in 1..=10 {
            let parts = partition(&items, n).unwrap();
            let flattened: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
            assert_eq!(flattened, items, "n = {n}");
        }
    }

    #[test]
    fn partition_rejects_bad_n() {
        let items = [1, 2, 3];
        assert!(partition(&items, 0).is_err());
        assert!(partition(&items, 4).is_err());
    }

    #[test]
    fn schedule_shape_for_three_rounds() {
        let schedule = plan_schedule(12, 3).unwrap();
        assert_eq!(schedule.phases.len(), 12);
        let first = &schedule.phases[0];
        assert_eq!(first.kind, PhaseKind::Synthesize);
        assert_eq!(first.segment_id, "T");
        assert_eq!(first.high_input, 0);
        let last = schedule.phases.last().unwrap();
        assert_eq!(last.kind, PhaseKind::TrainHigh);
        assert_eq!(last.output, Some((AgentRole::High, 4)));
        assert_eq!(last.low_input, 4);
        // rounds use the block's own high agent and disjoint segments
        assert_eq!(schedule.phases[3].segment_id, "T1");
        assert_eq!(schedule.phases[3].high_input, 1);
        assert_eq!(schedule.phases[6].segment_id, "T2");
        assert_eq!(schedule.phases[9].segment_id, "T3");
    }

    #[test]
    fn schedule_shape_for_one_round() {
        let schedule = plan_schedule(10, 1).unwrap();
        assert_eq!(schedule.phases.len(), 6);
        assert_eq!(
            schedule.phases.last().unwrap().output,
            Some((AgentRole::High, 2))
        );
    }

    fn setup(dir: &Path) -> (CheckpointRegistry, StubWorker, PathBuf) {
        let mut registry = CheckpointRegistry::open(&dir.join("registry.jsonl")).unwrap();
        register_bases(&mut registry, "http://high-base", "http://low-base").unwrap();
        let worker = StubWorker {
            dir: dir.to_path_buf(),
        };
        (registry, worker, dir.join("journal.jsonl"))
    }

    #[test]
    fn execute_full_run_reaches_final_versions() {
        let dir = tempfile::tempdir().unwrap();
        let (mut registry, worker, journal) = setup(dir.path());
        let schedule = plan_schedule(12, 3).unwrap();
        let (low, high) =
            execute(&schedule, &StubTrainer, &worker, &mut registry, &journal).unwrap();
        assert_eq!(low.version, 4);
        assert_eq!(high.version, 4);
        assert_eq!(registry.versions(AgentRole::Low), vec![0, 1, 2, 3, 4]);
        assert_eq!(registry.versions(AgentRole::High), vec![0, 1, 2, 3, 4]);
        let entries = read_journal(&journal).unwrap();
        assert_eq!(entries.len(), 12);
        assert!(entries.iter().all(|e| e.status == "completed"));
    }

    #[test]
    fn train_high_records_fresh_collaborator() {
        let dir = tempfile::tempdir().unwrap();
        let (mut registry, worker, journal) = setup(dir.path());
        let schedule = plan_schedule(12, 3).unwrap();
        execute(&schedule, &StubTrainer, &worker, &mut registry, &journal).unwrap();
        let entries = read_journal(&journal).unwrap();
        for entry in entries.iter().filter(|e| e.kind == PhaseKind::TrainHigh) {
            // block b trains H_{b+1} against the L_{b+1} produced just before
            let block = entry.phase_index / 3;
            assert_eq!(entry.collaborator_low, Some(block as u32 + 1));
        }
    }

    struct FailingTrainer {
        fail_at_phase: usize,
    }

    impl Trainer for FailingTrainer {
        fn submit(
            &self,
            path: &Path,
            role: AgentRole,
            base: &AgentCheckpoint,
        ) -> Result<AgentCheckpoint, String> {
            // the phase index is recoverable from call order; fail on the
            // batch artifact produced for the configured phase
            let _ = path;
            let next = base.version + 1;
            let phase_of_call = match role {
                AgentRole::Low => (next as usize - 1) * 3 + 1,
                AgentRole::High => (next as usize - 1) * 3 + 2,
            };
            if phase_of_call >= self.fail_at_phase {
                return Err("injected trainer outage".to_string());
            }
            StubTrainer.submit(path, role, base)
        }
    }

    #[test]
    fn crash_and_resume_completes_remaining_phases() {
        let dir = tempfile::tempdir().unwrap();
        let (mut registry, worker, journal) = setup(dir.path());
        let schedule = plan_schedule(12, 3).unwrap();
        let err = execute(
            &schedule,
            &FailingTrainer { fail_at_phase: 8 },
            &worker,
            &mut registry,
            &journal,
        );
        match err {
            Err(CoordError::Trainer { phase, .. }) => assert_eq!(phase, 8),
            other => panic!("expected trainer failure, got {other:?}"),
        }
        let before = read_journal(&journal).unwrap();
        assert_eq!(before.len(), 8); // phases 0..=7 completed, 8 failed
        assert_eq!(before.last().unwrap().phase_index, 7);

        // fresh registry handle simulates a process restart
        let mut registry = CheckpointRegistry::open(&dir.path().join("registry.jsonl")).unwrap();
        let (low, high) =
            execute(&schedule, &StubTrainer, &worker, &mut registry, &journal).unwrap();
        assert_eq!((low.version, high.version), (4, 4));
        let after = read_journal(&journal).unwrap();
        assert_eq!(after.len(), 12);
        let resumed: Vec<usize> = after[8..].iter().map(|e| e.phase_index).collect();
        assert_eq!(resumed, vec![8, 9, 10, 11]);
    }

    #[test]
    fn rerun_after_completion_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let (mut registry, worker, journal) = setup(dir.path());
        let schedule = plan_schedule(6, 1).unwrap();
        execute(&schedule, &StubTrainer, &worker, &mut registry, &journal).unwrap();
        let first = read_journal(&journal).unwrap();
        let (low, high) =
            execute(&schedule, &StubTrainer, &worker, &mut registry, &journal).unwrap();
        assert_eq!((low.version, high.version), (2, 2));
        assert_eq!(read_journal(&journal).unwrap().len(), first.len());
    }

    #[test]
    fn execute_requires_base_checkpoints() {
        let dir = tempfile::tempdir().unwrap();
        let mut registry = CheckpointRegistry::open(&dir.path().join("registry.jsonl")).unwrap();
        let worker = StubWorker {
            dir: dir.path().to_path_buf(),
        };
        let schedule = plan_schedule(6, 1).unwrap();
        let err = execute(
            &schedule,
            &StubTrainer,
            &worker,
            &mut registry,
            &dir.path().join("journal.jsonl"),
        );
        assert!(matches!(
            err,
            Err(CoordError::MissingCheckpoint {
                role: AgentRole::High,
                version: 0
            })
        ));
    }

    #[test]
    fn registry_enforces_version_monotonicity() {
        let dir = tempfile::tempdir().unwrap();
        let mut registry = CheckpointRegistry::open(&dir.path().join("registry.jsonl")).unwrap();
        register_bases(&mut registry, "h", "l").unwrap();
        let err = registry.register(AgentCheckpoint {
            role: AgentRole::Low,
            version: 3,
            endpoint: "x".to_string(),
            provenance: "p".to_string(),
        });
        assert!(matches!(
            err,
            Err(CoordError::VersionSkew {
                expected: 1,
                got: 3,
                ..
            })
        ));
    }

    #[test]
    fn registry_survives_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.jsonl");
        {
            let mut registry = CheckpointRegistry::open(&path).unwrap();
            register_bases(&mut registry, "h", "l").unwrap();
            registry
                .register(AgentCheckpoint {
                    role: AgentRole::Low,
                    version: 1,
                    endpoint: "stub://low/v1".to_string(),
                    provenance: "phase-1".to_string(),
                })
                .unwrap();
        }
        let registry = CheckpointRegistry::open(&path).unwrap();
        assert_eq!(registry.latest(AgentRole::Low).unwrap().version, 1);
        assert_eq!(registry.latest(AgentRole::High).unwrap().version, 0);
    }
}
