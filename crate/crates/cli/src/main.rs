use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use blicket_core::agents::{AgentKind, AgentOptions};
use blicket_core::harness::{evaluate, write_report, EvalOptions, ReportFormat};
use blicket_core::transcript::{read_jsonl, write_jsonl};
use blicket_core::{generate_episode, replay, serve, Config, EpisodeTranscript, ReplayVerdict};
use clap::{Parser, Subcommand};
use log::info;

/// Environment variable read for log filters, e.g. `BLICKET_LOG=debug`.
const LOG_ENV: &str = "BLICKET_LOG";

#[derive(Parser)]
#[command(
    name = "blicket",
    version,
    about = "Blicket-detection environment tools"
)]
struct Cli {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a heuristic agent and write a metrics report.
    Run {
        #[arg(long)]
        agent: AgentKind,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Seed for the agents' own randomness; defaults to --seed.
        #[arg(long)]
        agent_seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Write every episode transcript to this JSONL file.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Naive agent: learn only from single-object inactive panels.
        #[arg(long)]
        naive_singletons_only: bool,
    },
    /// Serve the line-delimited JSON protocol on stdin/stdout.
    Serve,
    /// Re-execute recorded transcripts and check every reward and termination flag.
    Replay { path: PathBuf },
    /// Write generated episode specs as JSONL.
    Gen {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> anyhow::Result<Config> {
    let config = match path {
        None => Config::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", p.display()))?
        }
    };
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Run {
            agent,
            episodes,
            seed,
            agent_seed,
            workers,
            report,
            format,
            transcripts,
            naive_singletons_only,
        } => {
            let options = EvalOptions {
                agent,
                agent_options: AgentOptions {
                    naive_inactive_evidence: !naive_singletons_only,
                },
                master_seed: seed,
                agent_seed,
                episode_count: episodes,
                workers,
            };
            info!("running {agent} for {episodes} episodes (seed {seed}, {workers} workers)");
            let (metrics, records) = evaluate(&options, &config)?;
            match report {
                Some(path) => write_report(&metrics, format, &path)?,
                None => print!(
                    "{}",
                    match format {
                        ReportFormat::Json => metrics.to_json(),
                        ReportFormat::Csv => metrics.to_csv(),
                    }
                ),
            }
            if let Some(path) = transcripts {
                write_jsonl(&path, &records)?;
            }
            info!(
                "episode accuracy {:.4}, mean reward {:.4}",
                metrics.episode_accuracy.value, metrics.episode_reward.mean
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve => {
            info!("serving protocol on stdio");
            let stdin = io::stdin().lock();
            let stdout = BufWriter::new(io::stdout().lock());
            serve(config, stdin, stdout)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { path } => {
            let transcripts: Vec<EpisodeTranscript> = read_jsonl(&path)?;
            if transcripts.is_empty() {
                bail!("{} holds no transcripts", path.display());
            }
            for (line, t) in transcripts.iter().enumerate() {
                if let ReplayVerdict::Fail { step, reason } = replay(t, &config)? {
                    println!(
                        "FAIL episode {} (line {}) at step {step}: {reason}",
                        t.spec.episode_index,
                        line + 1
                    );
                    return Ok(ExitCode::FAILURE);
                }
            }
            println!("PASS {} episodes", transcripts.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { seed, count, out } => {
            if count == 0 {
                bail!("--count must be at least 1");
            }
            let specs = (0..count)
                .map(|i| generate_episode(seed, i, &config))
                .collect::<blicket_core::Result<Vec<_>>>()?;
            write_jsonl(&out, &specs)?;
            info!("wrote {count} episodes to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
