//! End-to-end tests of the binary against the bundled fixtures.

use claimcheck_core::grpo::Group;
use claimcheck_core::protocol::{parse_stream, Role};
use claimcheck_core::rollout::Termination;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn claimcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimcheck"))
        .current_dir(workspace_root())
        .args(args)
        .output()
        .expect("binary runs")
}

fn scripted(extra: &[&str]) -> Output {
    let mut args = vec![
        "--config",
        "fixtures/config/demo.toml",
        "--scripted",
        "fixtures/scripts/verify_demo.json",
    ];
    args.extend_from_slice(extra);
    claimcheck(&args)
}

const SUPPORT_CLAIM: &str =
    "Zenyatta is voiced by Feodor Chin and appears in a game developed by Blizzard Entertainment.";

#[test]
fn verify_supported_claim_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = scripted(&["--out", out, "verify", SUPPORT_CLAIM, "--dump"]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("Support"));
    assert!(dir.path().join("verify-transcript.json").exists());
}

#[test]
fn verify_refuted_claim_exits_zero() {
    let output = scripted(&["verify", "Overwatch was developed by Valve."]);
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8(output.stdout).unwrap().contains("Refute"));
}

#[test]
fn verify_without_script_rules_exits_format_violation_code() {
    let output = scripted(&["verify", "An unscripted claim about nothing."]);
    // the default scripted response never produces a verdict
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn verify_unreachable_endpoint_exits_endpoint_failure_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(
        &config,
        format!(
            "[endpoints]\nhigh = \"http://127.0.0.1:9/\"\nlow = \"http://127.0.0.1:9/\"\n\
             [retrieval]\ncorpus = \"{}/fixtures/corpus/demo.jsonl\"\n",
            workspace_root().display()
        ),
    )
    .unwrap();
    let output = claimcheck(&["--config", config.to_str().unwrap(), "verify", "x"]);
    assert_eq!(output.status.code(), Some(5), "{output:?}");
}

#[test]
fn config_with_missing_corpus_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(&config, "[retrieval]\ncorpus = \"/no/such/corpus.jsonl\"\n").unwrap();
    let output = claimcheck(&["--config", config.to_str().unwrap(), "verify", "x"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8(output.stderr).unwrap().contains("corpus not found"));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never-created");
    let output = scripted(&[
        "--out",
        out.to_str().unwrap(),
        "--dry-run",
        "verify",
        SUPPORT_CLAIM,
        "--dump",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn schedule_dry_run_prints_twelve_phases() {
    let output = claimcheck(&[
        "--config",
        "fixtures/config/demo.toml",
        "--dry-run",
        "schedule",
        "--claims",
        "12",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("12 phases"));
    assert_eq!(stdout.matches("Synthesize").count(), 4);
    assert!(stdout.contains("High v4"));
}

#[test]
fn schedule_executes_with_stub_trainer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = claimcheck(&[
        "--config",
        "fixtures/config/demo.toml",
        "--out",
        out,
        "schedule",
        "--claims",
        "12",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("low v4"));
    assert!(dir.path().join("journal.jsonl").exists());
    assert!(dir.path().join("registry.jsonl").exists());
}

#[test]
fn eval_scores_demo_dataset_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = scripted(&[
        "--out",
        out,
        "eval",
        "--dataset",
        "fixtures/datasets/demo_test.jsonl",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("acc 1.0000"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval-report.json")).unwrap())
            .unwrap();
    assert_eq!(report["counts"]["correct"], 2);
}

#[test]
fn synth_writes_filtered_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = scripted(&[
        "--out",
        out,
        "synth",
        "--dataset",
        "fixtures/datasets/demo_train.jsonl",
        "--stage",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let lines = std::fs::read_to_string(dir.path().join("synthesis-stage1.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = lines
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["answer"], "Feodor Chin");
    assert_eq!(records[0]["stage"], 1);
}

#[test]
fn rollout_group_dumps_every_member() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = scripted(&[
        "--out",
        out,
        "rollout",
        "--question",
        "Who voices Zenyatta in Overwatch?",
        "--group-size",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let lines = std::fs::read_to_string(dir.path().join("search-group.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 3);
}

#[test]
fn train_prep_assembles_ten_records_from_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let make_group = |id: &str, rewards: Vec<f64>| Group {
        group_id: id.to_string(),
        input: "q".to_string(),
        rollouts: (0..rewards.len())
            .map(|i| claimcheck_core::grpo::RolloutRecord {
                rollout_id: format!("{id}-{i}"),
                role: Role::Search,
                prompt: "p".to_string(),
                transcript: parse_stream("<report>r</report>", Role::Search),
                termination: Termination::Completed,
            })
            .collect(),
        rewards,
    };
    let groups = vec![
        make_group("g1", vec![1.0, 0.1, 0.1, 0.1, 0.0]),
        make_group("g2", vec![1.0, 1.0, 1.0, 1.0, 1.0]),
    ];
    let groups_path = dir.path().join("groups.json");
    std::fs::write(&groups_path, serde_json::to_string(&groups).unwrap()).unwrap();
    let out = dir.path().join("out");
    let output = claimcheck(&[
        "--config",
        "fixtures/config/demo.toml",
        "--out",
        out.to_str().unwrap(),
        "train-prep",
        "--groups",
        groups_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let batch = std::fs::read_to_string(out.join("batch.jsonl")).unwrap();
    // header line plus ten records
    assert_eq!(batch.lines().count(), 11);
    assert!(String::from_utf8(output.stdout).unwrap().contains("10 records"));
}

#[test]
fn serve_retrieval_answers_health_probe() {
    use std::io::{BufRead as _, BufReader, Read as _, Write as _};

    let mut child = Command::new(env!("CARGO_BIN_EXE_claimcheck"))
        .current_dir(workspace_root())
        .args([
            "--config",
            "fixtures/config/demo.toml",
            "serve-retrieval",
            "--addr",
            "127.0.0.1:0",
        ])
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().unwrap())
        .read_line(&mut line)
        .unwrap();
    assert!(line.contains("serving 3 passages"), "{line:?}");
    let addr = line.rsplit("http://").next().unwrap().trim().to_string();
    let mut stream = std::net::TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "GET /health HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    assert!(response.contains("\"doc_count\":3"), "{response:?}");
    child.kill().unwrap();
    child.wait().unwrap();
}

#[test]
fn serve_retrieval_bad_corpus_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    std::fs::write(&config, "[retrieval]\ncorpus = \"/missing.jsonl\"\n").unwrap();
    let output = claimcheck(&[
        "--config",
        config.to_str().unwrap(),
        "serve-retrieval",
    ]);
    assert_eq!(output.status.code(), Some(1));
}
