//! Subcommand implementations.

pub mod eval;
pub mod rollout;
pub mod schedule;
pub mod serve;
pub mod synth;
pub mod train_prep;
pub mod verify;

use crate::backends;
use crate::config::RunConfig;
use anyhow::{Context as _, Result};
use claimcheck_core::rollout::{DecodingParams, ScriptedBackend, Termination};
use std::path::{Path, PathBuf};

/// Resolved global state every subcommand receives.
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub dry_run: bool,
    pub script: Option<ScriptedBackend>,
    out_dir: PathBuf,
}

impl Context {
    pub fn build(args: &crate::GlobalArgs) -> Result<Self> {
        let config = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let script = args
            .scripted
            .as_deref()
            .map(backends::load_script)
            .transpose()?;
        let out_dir = args
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let seed = args.seed.unwrap_or(config.seed);
        Ok(Context {
            config,
            seed,
            dry_run: args.dry_run,
            script,
            out_dir,
        })
    }

    /// Creates the output directory on first use; dry runs never get here.
    pub fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("cannot create {}", self.out_dir.display()))?;
        Ok(&self.out_dir)
    }

    pub fn decoding(&self) -> DecodingParams {
        DecodingParams::default()
    }
}

/// Stable exit codes for rollout outcomes.
pub fn termination_exit(termination: Termination) -> u8 {
    match termination {
        Termination::Completed => 0,
        Termination::FormatViolation => 2,
        Termination::LimitExceeded => 3,
        Termination::ContextOverflow => 4,
        Termination::EndpointFailure => 5,
    }
}
