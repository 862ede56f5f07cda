//! Replayable episode records and their JSONL storage.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::env::{Environment, Phase};
use crate::error::{Error, Result};
use crate::oracle::OracleBelief;
use crate::sampler::EpisodeSpec;
use crate::types::{Action, ObjectSet, ObservationVector};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: usize,
    pub phase: Phase,
    pub action: Action,
    /// Subset placed on the machine, when a trial ran.
    pub trial: Option<ObjectSet>,
    pub observation: ObservationVector,
    pub reward: f64,
    pub oracle_belief: OracleBelief,
    pub feasible_count: usize,
    pub solved: bool,
    pub done: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTranscript {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    pub config_digest: String,
    pub config: Config,
    pub spec: EpisodeSpec,
    pub steps: Vec<StepRecord>,
    pub total_reward: f64,
    pub solved: bool,
    pub solved_at_step: Option<usize>,
}

impl EpisodeTranscript {
    pub fn new(config: Config, spec: EpisodeSpec, steps: Vec<StepRecord>) -> Self {
        let total_reward = steps.iter().map(|s| s.reward).sum();
        let solved_at_step = steps.iter().find(|s| s.solved).map(|s| s.step);
        EpisodeTranscript {
            version: TRANSCRIPT_VERSION,
            agent: None,
            config_digest: config.digest(),
            config,
            spec,
            steps,
            total_reward,
            solved: solved_at_step.is_some(),
            solved_at_step,
        }
    }

    pub fn with_agent(mut self, agent: impl Into<String>) -> Self {
        self.agent = Some(agent.into());
        self
    }

    /// Sizes of the subsets actually placed on the machine, by step number.
    pub fn trial_sizes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.steps
            .iter()
            .filter_map(|s| s.trial.map(|t| (s.step, t.len())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayVerdict {
    Pass,
    Fail { step: usize, reason: String },
}

impl ReplayVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, ReplayVerdict::Pass)
    }
}

/// Re-executes the recorded actions and compares every reward, observation
/// and termination flag with the record.
///
/// A transcript recorded under a different config is an error, not a verdict.
pub fn replay(transcript: &EpisodeTranscript, config: &Config) -> Result<ReplayVerdict> {
    let active = config.digest();
    if transcript.config_digest != active {
        return Err(Error::ConfigMismatch {
            recorded: transcript.config_digest.clone(),
            active,
        });
    }
    let fail = |step: usize, reason: String| Ok(ReplayVerdict::Fail { step, reason });

    let mut env = Environment::new(config.clone())?;
    env.reset(transcript.spec.seed, transcript.spec.episode_index)?;
    if env.state().map(|s| &s.spec) != Some(&transcript.spec) {
        return fail(0, "regenerated episode spec differs from the record".into());
    }
    for record in &transcript.steps {
        let out = match env.step(&record.action) {
            Ok(out) => out,
            Err(e) => return fail(record.step, format!("environment rejected the action: {e}")),
        };
        if out.reward.to_bits() != record.reward.to_bits() {
            return fail(
                record.step,
                format!("reward {} recorded, {} replayed", record.reward, out.reward),
            );
        }
        if out.done != record.done {
            return fail(
                record.step,
                format!("done {} recorded, {} replayed", record.done, out.done),
            );
        }
        if out.info.solved != record.solved {
            return fail(
                record.step,
                format!(
                    "solved {} recorded, {} replayed",
                    record.solved, out.info.solved
                ),
            );
        }
        if out.observation != record.observation {
            return fail(record.step, "observation differs".into());
        }
    }
    let last = transcript.steps.last().map_or(0, |s| s.step);
    if !env.state().is_some_and(|s| s.status.is_done()) {
        return fail(last, "record ends before the episode terminates".into());
    }
    let total: f64 = transcript.steps.iter().map(|s| s.reward).sum();
    if total.to_bits() != transcript.total_reward.to_bits() {
        return fail(
            last,
            format!(
                "total reward {} recorded, {} summed",
                transcript.total_reward, total
            ),
        );
    }
    Ok(ReplayVerdict::Pass)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file =
        File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| Error::json("serializing record", e))?;
        out.write_all(b"\n")
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    out.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut items = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), n + 1), e))?;
        items.push(item);
    }
    Ok(items)
}
