//! Command-line entry point for the claim-verification toolchain.
//!
//! Exit codes for commands that run a rollout:
//! 0 completed, 2 format violation, 3 limit exceeded, 4 context overflow,
//! 5 endpoint failure. All other failures exit 1.

mod backends;
mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "claimcheck", version, about = "Two-agent claim verification toolchain")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for all randomized steps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the plan and exit without side effects.
    #[arg(long, global = true)]
    dry_run: bool,
    /// JSON script file; replaces every model endpoint with a scripted
    /// backend so the full pipeline runs offline.
    #[arg(long, global = true, value_name = "FILE")]
    scripted: Option<PathBuf>,
    /// Output directory for dumps, batches, reports, and journals.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the lexical index from the corpus and serve it over HTTP.
    ServeRetrieval {
        /// Bind address; port 0 picks a free port.
        #[arg(long, default_value = "127.0.0.1:0")]
        addr: String,
        /// Results per query, overriding the config default.
        #[arg(short, long)]
        k: Option<usize>,
    },
    /// Run one reasoning rollout over a claim and print the verdict.
    Verify {
        claim: String,
        /// Write the structured transcript file.
        #[arg(long)]
        dump: bool,
    },
    /// Run a group of rollouts over one input and dump them.
    Rollout {
        /// Claim for a reasoning-agent group.
        #[arg(long, conflicts_with = "question")]
        claim: Option<String>,
        /// Question for a search-agent group.
        #[arg(long)]
        question: Option<String>,
        #[arg(long)]
        group_size: Option<usize>,
    },
    /// Synthesize search-agent training questions from a train split.
    Synth {
        /// Train dataset with evidence, one JSON record per line.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 1)]
        stage: u32,
    },
    /// Assemble rewarded rollout groups into a training batch file.
    TrainPrep {
        /// JSON file holding the rewarded groups.
        #[arg(long)]
        groups: PathBuf,
    },
    /// Plan and execute the alternating-training schedule.
    Schedule {
        /// Claim count to partition; defaults to the dataset size.
        #[arg(long, conflicts_with = "dataset")]
        claims: Option<usize>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        rounds: Option<u32>,
    },
    /// Run the reasoning agent over a test split and score it.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Stratified sample size; omit to evaluate every record.
        #[arg(long)]
        sample: Option<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let ctx = match commands::Context::build(&cli.global) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::ServeRetrieval { addr, k } => commands::serve::run(&ctx, &addr, k),
        Command::Verify { claim, dump } => commands::verify::run(&ctx, &claim, dump),
        Command::Rollout {
            claim,
            question,
            group_size,
        } => commands::rollout::run(&ctx, claim.as_deref(), question.as_deref(), group_size),
        Command::Synth { dataset, stage } => commands::synth::run(&ctx, &dataset, stage),
        Command::TrainPrep { groups } => commands::train_prep::run(&ctx, &groups),
        Command::Schedule {
            claims,
            dataset,
            rounds,
        } => commands::schedule::run(&ctx, claims, dataset.as_deref(), rounds),
        Command::Eval { dataset, sample } => commands::eval::run(&ctx, &dataset, sample),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
