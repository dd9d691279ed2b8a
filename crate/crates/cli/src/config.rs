//! Declarative run configuration shared by all subcommands.

use anyhow::{bail, Context, Result};
use claimcheck_core::grpo::GrpoConfig;
use claimcheck_core::rollout::RolloutLimits;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Endpoints {
    pub high: Option<String>,
    pub low: Option<String>,
    pub judge: Option<String>,
    pub synthesis: Option<String>,
    pub embedding: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalSection {
    pub corpus: Option<PathBuf>,
    pub k: usize,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        RetrievalSection { corpus: None, k: 3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CoordinationSection {
    pub rounds: u32,
}

impl Default for CoordinationSection {
    fn default() -> Self {
        CoordinationSection { rounds: 1 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub endpoints: Endpoints,
    pub retrieval: RetrievalSection,
    pub limits: RolloutLimits,
    pub grpo: GrpoConfig,
    pub coordination: CoordinationSection,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: RunConfig =
            toml::from_str(&text).with_context(|| format!("bad config {}", path.display()))?;
        config.apply_env_overrides();
        config.validate()?;
        Ok(config)
    }

    fn apply_env_overrides(&mut self) {
        let slots = [
            ("CLAIMCHECK_HIGH_ENDPOINT", &mut self.endpoints.high),
            ("CLAIMCHECK_LOW_ENDPOINT", &mut self.endpoints.low),
            ("CLAIMCHECK_JUDGE_ENDPOINT", &mut self.endpoints.judge),
            ("CLAIMCHECK_SYNTHESIS_ENDPOINT", &mut self.endpoints.synthesis),
            ("CLAIMCHECK_EMBEDDING_ENDPOINT", &mut self.endpoints.embedding),
        ];
        for (var, slot) in slots {
            if let Ok(value) = std::env::var(var) {
                *slot = Some(value);
            }
        }
    }

    /// Rejects configs referencing missing paths or out-of-range values
    /// before any command does work.
    pub fn validate(&self) -> Result<()> {
        if self.retrieval.k < 1 {
            bail!("retrieval.k must be at least 1");
        }
        if self.coordination.rounds < 1 {
            bail!("coordination.rounds must be at least 1");
        }
        if let Some(corpus) = &self.retrieval.corpus {
            if !corpus.exists() {
                bail!("retrieval corpus not found: {}", corpus.display());
            }
        }
        Ok(())
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.retrieval
            .corpus
            .as_deref()
            .context("config has no retrieval.corpus")
    }
}
