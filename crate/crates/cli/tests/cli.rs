use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use blicket_core::sampler::check_context;
use blicket_core::{Config, EpisodeSpec, EpisodeTranscript};

fn blicket() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blicket"))
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../golden")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    blicket().args(args).output().unwrap()
}

fn serve_with(input: &str) -> String {
    let mut child = blicket()
        .arg("serve")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn golden_sessions_replay_byte_for_byte_over_stdio() {
    for name in ["solved_instantly", "exhausted", "mid_episode_solve"] {
        let requests = fs::read_to_string(golden(&format!("{name}.requests.jsonl"))).unwrap();
        let expected = fs::read_to_string(golden(&format!("{name}.responses.jsonl"))).unwrap();
        assert_eq!(serve_with(&requests), expected, "{name}");
    }
}

#[test]
fn serve_ends_cleanly_at_end_of_input() {
    let out = serve_with("{\"cmd\":\"step\",\"action\":[]}\n");
    assert!(out.contains("\"error_kind\":\"state\""));
}

fn write_transcripts(dir: &Path) -> PathBuf {
    let path = dir.join("t.jsonl");
    let out = run(&[
        "run",
        "--agent",
        "naive",
        "--episodes",
        "20",
        "--seed",
        "7",
        "--report",
        dir.join("r.csv").to_str().unwrap(),
        "--format",
        "csv",
        "--transcripts",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn run_writes_report_and_replayable_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_transcripts(dir.path());
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("metric,value\nagent,naive\n"));
    let out = run(&["replay", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "PASS 20 episodes"
    );
}

#[test]
fn replay_reports_the_first_perturbed_step() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_transcripts(dir.path());
    let text = fs::read_to_string(&path).unwrap();
    let mut transcripts: Vec<EpisodeTranscript> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    transcripts[3].steps[5].reward -= 0.25;
    let tampered: String = transcripts
        .iter()
        .map(|t| serde_json::to_string(t).unwrap() + "\n")
        .collect();
    fs::write(&path, tampered).unwrap();
    let out = run(&["replay", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.starts_with("FAIL episode 3 (line 4) at step 6"),
        "{stdout}"
    );
}

#[test]
fn replay_under_another_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_transcripts(dir.path());
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{"solve_bonus": 10.0}"#).unwrap();
    let out = run(&[
        "--config",
        config.to_str().unwrap(),
        "replay",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config mismatch"));
}

#[test]
fn gen_is_deterministic_and_specs_satisfy_the_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let out = run(&[
            "gen",
            "--seed",
            "42",
            "--count",
            "200",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let config = Config::default();
    let specs: Vec<EpisodeSpec> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(specs.len(), 200);
    for (i, spec) in specs.iter().enumerate() {
        assert_eq!(spec.episode_index, i as u64);
        assert_eq!(
            check_context(&spec.context, spec.ground_truth, &config),
            Ok(())
        );
    }
}

#[test]
fn bad_invocations_fail_with_context() {
    let out = run(&["gen", "--count", "0", "--out", "/tmp/unused.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["replay", "/nonexistent/t.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/t.jsonl"));
    let out = run(&["run", "--agent", "oracle"]);
    assert!(!out.status.success());
}
