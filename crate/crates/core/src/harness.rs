//! Batch evaluation: runs seeded episodes for one agent and reduces the
//! transcripts into a [`MetricsReport`].
//!
//! Episodes are independent given `(master_seed, episode_index)`, so they fan
//! out over a rayon pool; the reduction always walks episodes in index order,
//! which keeps reports byte-identical for any worker count.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{build_agent, Agent, AgentKind, AgentOptions};
use crate::config::Config;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, STREAM_AGENT};
use crate::sampler::QueryLabel;
use crate::transcript::EpisodeTranscript;

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub agent: AgentKind,
    pub agent_options: AgentOptions,
    pub master_seed: u64,
    /// Seed of the agents' streams; defaults to `master_seed`.
    pub agent_seed: Option<u64>,
    pub episode_count: usize,
    pub workers: usize,
}

impl EvalOptions {
    pub fn new(agent: AgentKind, master_seed: u64, episode_count: usize) -> Self {
        EvalOptions {
            agent,
            agent_options: AgentOptions::default(),
            master_seed,
            agent_seed: None,
            episode_count,
            workers: 1,
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// A proportion with its 95% normal-approximation interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        let half = Z_95 * (p * (1.0 - p) / n).sqrt();
        Proportion {
            value: p,
            ci_low: (p - half).max(0.0),
            ci_high: (p + half).min(1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.ci_low..=self.ci_high).contains(&x)
    }

    pub fn overlaps(&self, other: &Proportion) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// A sample mean with its 95% normal-approximation interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half = Z_95 * (var / n).sqrt();
        MeanEstimate {
            mean,
            ci_low: mean - half,
            ci_high: mean + half,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepsHistogram {
    /// Entry `k` counts episodes solved on step `k + 1`.
    pub solved_at_step: Vec<usize>,
    pub unsolved: usize,
}

impl StepsHistogram {
    pub fn total(&self) -> usize {
        self.solved_at_step.iter().sum::<usize>() + self.unsolved
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSizeSummary {
    pub step: usize,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelFrequency {
    pub label: QueryLabel,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub agent: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub agent_seed: u64,
    pub episode_count: usize,
    /// Fraction of episodes whose first belief already solved them.
    pub context_accuracy: Proportion,
    /// Mean reward of the first step.
    pub context_reward: f64,
    /// Fraction solved during the context phase (first step when there is none).
    pub context_phase_accuracy: Proportion,
    /// Mean summed reward over the context phase.
    pub context_phase_reward: f64,
    pub episode_accuracy: Proportion,
    pub episode_reward: MeanEstimate,
    pub steps_to_solve: StepsHistogram,
    pub objects_per_trial: Vec<TrialSizeSummary>,
    pub query_labels: Vec<LabelFrequency>,
}

/// Runs one full episode of `agent` against `env`.
pub fn run_episode(
    env: &mut Environment,
    agent: &mut dyn Agent,
    master_seed: u64,
    episode_index: u64,
    agent_seed: u64,
) -> Result<EpisodeTranscript> {
    let reset = env.reset(master_seed, episode_index)?;
    let context = reset
        .observations
        .iter()
        .map(|o| o.decode())
        .collect::<Result<Vec<_>>>()?;
    agent.reset(
        &context,
        seeded_rng(agent_seed, episode_index, STREAM_AGENT),
    );
    loop {
        let action = agent.act();
        let out = env.step(&action)?;
        if out.info.trial_executed {
            agent.observe(&out.observation.decode()?);
        }
        if out.done {
            break;
        }
    }
    Ok(env.export_transcript()?.with_agent(agent.name()))
}

/// Runs every episode and returns the transcripts in episode order.
pub fn run_episodes(options: &EvalOptions, config: &Config) -> Result<Vec<EpisodeTranscript>> {
    if options.episode_count == 0 {
        return Err(Error::Contract("episode_count must be at least 1".into()));
    }
    config.validate()?;
    let agent_seed = options.agent_seed.unwrap_or(options.master_seed);
    let run_one = |index: usize| -> Result<EpisodeTranscript> {
        let mut env = Environment::new(config.clone())?;
        let mut agent = build_agent(options.agent, config, &options.agent_options);
        run_episode(
            &mut env,
            agent.as_mut(),
            options.master_seed,
            index as u64,
            agent_seed,
        )
    };
    if options.workers <= 1 {
        return (0..options.episode_count).map(run_one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", options.workers)))?;
    pool.install(|| {
        (0..options.episode_count)
            .into_par_iter()
            .map(run_one)
            .collect()
    })
}

pub fn evaluate(
    options: &EvalOptions,
    config: &Config,
) -> Result<(MetricsReport, Vec<EpisodeTranscript>)> {
    let transcripts = run_episodes(options, config)?;
    let report = summarize(
        options.agent.as_str(),
        options.master_seed,
        options.agent_seed.unwrap_or(options.master_seed),
        config,
        &transcripts,
    );
    Ok((report, transcripts))
}

/// Reduces transcripts (in the given order) into a report.
pub fn summarize(
    agent: &str,
    master_seed: u64,
    agent_seed: u64,
    config: &Config,
    transcripts: &[EpisodeTranscript],
) -> MetricsReport {
    let n = transcripts.len();
    let phase_len = config.context_steps().max(1);

    let first_solved = transcripts
        .iter()
        .filter(|t| t.steps.first().is_some_and(|s| s.solved))
        .count();
    let first_reward: f64 = transcripts
        .iter()
        .map(|t| t.steps.first().map_or(0.0, |s| s.reward))
        .sum();
    let phase_solved = transcripts
        .iter()
        .filter(|t| t.solved_at_step.is_some_and(|s| s <= phase_len))
        .count();
    let phase_reward: f64 = transcripts
        .iter()
        .map(|t| {
            t.steps
                .iter()
                .take(phase_len)
                .map(|s| s.reward)
                .sum::<f64>()
        })
        .sum();
    let solved = transcripts.iter().filter(|t| t.solved).count();
    let totals: Vec<f64> = transcripts.iter().map(|t| t.total_reward).collect();

    let mut label_counts = [0usize; QueryLabel::ALL.len()];
    for t in transcripts {
        for label in &t.spec.query_labels {
            label_counts[QueryLabel::ALL.iter().position(|l| l == label).unwrap()] += 1;
        }
    }
    let label_total: usize = label_counts.iter().sum();
    let query_labels = QueryLabel::ALL
        .iter()
        .zip(label_counts)
        .map(|(&label, count)| LabelFrequency {
            label,
            count,
            fraction: if label_total == 0 {
                0.0
            } else {
                count as f64 / label_total as f64
            },
        })
        .collect();

    let denom = n.max(1) as f64;
    MetricsReport {
        agent: agent.to_string(),
        config_digest: config.digest(),
        master_seed,
        agent_seed,
        episode_count: n,
        context_accuracy: Proportion::from_counts(first_solved, n),
        context_reward: first_reward / denom,
        context_phase_accuracy: Proportion::from_counts(phase_solved, n),
        context_phase_reward: phase_reward / denom,
        episode_accuracy: Proportion::from_counts(solved, n),
        episode_reward: MeanEstimate::from_samples(&totals),
        steps_to_solve: steps_histogram(transcripts, config.max_steps),
        objects_per_trial: trial_size_stats(transcripts),
        query_labels,
    }
}

/// Solved episodes bucketed by the step that solved them.
pub fn steps_histogram(transcripts: &[EpisodeTranscript], max_steps: usize) -> StepsHistogram {
    let mut hist = StepsHistogram {
        solved_at_step: vec![0; max_steps],
        unsolved: 0,
    };
    for t in transcripts {
        match t.solved_at_step {
            Some(step) if (1..=max_steps).contains(&step) => hist.solved_at_step[step - 1] += 1,
            _ => hist.unsolved += 1,
        }
    }
    hist
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Five-number summary of executed trial sizes for each step that ran a trial.
pub fn trial_size_stats(transcripts: &[EpisodeTranscript]) -> Vec<TrialSizeSummary> {
    let mut by_step: Vec<Vec<f64>> = Vec::new();
    for t in transcripts {
        for (step, size) in t.trial_sizes() {
            if by_step.len() < step {
                by_step.resize(step, Vec::new());
            }
            by_step[step - 1].push(size as f64);
        }
    }
    by_step
        .into_iter()
        .enumerate()
        .filter(|(_, sizes)| !sizes.is_empty())
        .map(|(k, mut sizes)| {
            sizes.sort_by(f64::total_cmp);
            TrialSizeSummary {
                step: k + 1,
                count: sizes.len(),
                min: sizes[0],
                q1: quantile(&sizes, 0.25),
                median: quantile(&sizes, 0.5),
                q3: quantile(&sizes, 0.75),
                max: sizes[sizes.len() - 1],
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite metric")
}

impl MetricsReport {
    /// Flat `(metric, value)` rows in a fixed order; one CSV line each.
    pub fn metric_rows(&self) -> Vec<(String, String)> {
        let mut rows: Vec<(String, String)> = vec![
            ("agent".into(), self.agent.clone()),
            ("config_digest".into(), self.config_digest.clone()),
            ("master_seed".into(), self.master_seed.to_string()),
            ("agent_seed".into(), self.agent_seed.to_string()),
            ("episode_count".into(), self.episode_count.to_string()),
        ];
        for (name, p) in [
            ("context_accuracy", &self.context_accuracy),
            ("context_phase_accuracy", &self.context_phase_accuracy),
            ("episode_accuracy", &self.episode_accuracy),
        ] {
            rows.push((name.into(), number(p.value)));
            rows.push((format!("{name}.ci_low"), number(p.ci_low)));
            rows.push((format!("{name}.ci_high"), number(p.ci_high)));
        }
        rows.push(("context_reward".into(), number(self.context_reward)));
        rows.push((
            "context_phase_reward".into(),
            number(self.context_phase_reward),
        ));
        rows.push(("episode_reward".into(), number(self.episode_reward.mean)));
        rows.push((
            "episode_reward.ci_low".into(),
            number(self.episode_reward.ci_low),
        ));
        rows.push((
            "episode_reward.ci_high".into(),
            number(self.episode_reward.ci_high),
        ));
        for (k, count) in self.steps_to_solve.solved_at_step.iter().enumerate() {
            rows.push((format!("steps_to_solve.{}", k + 1), count.to_string()));
        }
        rows.push((
            "steps_to_solve.unsolved".into(),
            self.steps_to_solve.unsolved.to_string(),
        ));
        for s in &self.objects_per_trial {
            let prefix = format!("objects_per_trial.{}", s.step);
            rows.push((format!("{prefix}.count"), s.count.to_string()));
            for (stat, v) in [
                ("min", s.min),
                ("q1", s.q1),
                ("median", s.median),
                ("q3", s.q3),
                ("max", s.max),
            ] {
                rows.push((format!("{prefix}.{stat}"), number(v)));
            }
        }
        for l in &self.query_labels {
            rows.push((
                format!("query_labels.{}", l.label.as_str()),
                l.count.to_string(),
            ));
        }
        rows
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut text = String::from("metric,value\n");
        for (metric, value) in self.metric_rows() {
            text.push_str(&metric);
            text.push(',');
            text.push_str(&value);
            text.push('\n');
        }
        text
    }
}

pub fn write_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    };
    fs::write(path, text).map_err(|e| Error::io(format!("writing report to {}", path.display()), e))
}
