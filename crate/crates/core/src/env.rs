//! The episode state machine behind `reset` / `step`.
//!
//! Step `t` of an episode runs in this order:
//! 1. the belief half of the action is checked against the ground truth; a
//!    correct belief ends the episode with the solve bonus and no trial runs;
//! 2. during the context phase (the first `num_context_panels` steps when
//!    `context_consumes_steps` is set) the trial half is ignored and the
//!    observation is the next context panel;
//! 3. otherwise the trial vector is binarized, the panel is produced by the
//!    machine, the feasible set is filtered, and the reward is the step
//!    penalty minus the belief's divergence from the oracle;
//! 4. the episode is exhausted once `max_steps` actions were taken.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Config, RewardOracle, TrialBinarization};
use crate::error::{Error, Result};
use crate::oracle::{is_solved, step_reward, FeasibleSet, OracleBelief};
use crate::rng::{seeded_rng, SeededRng, STREAM_TRIALS};
use crate::sampler::{generate_episode, EpisodeSpec};
use crate::transcript::{EpisodeTranscript, StepRecord};
use crate::types::{Action, ObjectSet, ObservationVector, Panel, TrialVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpisodeStatus {
    AwaitingFirstAction,
    Running,
    Solved,
    Exhausted,
}

impl EpisodeStatus {
    pub fn is_done(self) -> bool {
        matches!(self, EpisodeStatus::Solved | EpisodeStatus::Exhausted)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Context,
    Trial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub oracle_belief: OracleBelief,
    pub feasible_count: usize,
    pub solved: bool,
    pub phase: Phase,
    /// Actions taken so far, including this one.
    pub step_index: usize,
    pub trial_executed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observation: ObservationVector,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResetOutcome {
    pub episode_id: u64,
    pub observations: Vec<ObservationVector>,
}

#[derive(Clone, Debug)]
pub struct EpisodeState {
    pub spec: EpisodeSpec,
    pub feasible: FeasibleSet,
    pub step_index: usize,
    pub status: EpisodeStatus,
    trial_rng: SeededRng,
    records: Vec<StepRecord>,
}

/// Converts a softened trial vector into the subset placed on the machine.
pub fn binarize_trial(
    trial: &TrialVector,
    mode: TrialBinarization,
    rng: &mut SeededRng,
) -> ObjectSet {
    match mode {
        TrialBinarization::Threshold => trial
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.5)
            .map(|(i, _)| i)
            .collect(),
        TrialBinarization::Sample => {
            let draws: Vec<f64> = (0..trial.len()).map(|_| rng.gen::<f64>()).collect();
            trial
                .as_slice()
                .iter()
                .zip(draws)
                .enumerate()
                .filter(|(_, (&p, u))| *u < p)
                .map(|(i, _)| i)
                .collect()
        }
    }
}

/// One environment instance; runs a single episode at a time.
#[derive(Clone, Debug)]
pub struct Environment {
    config: Config,
    episodes_started: u64,
    state: Option<EpisodeState>,
}

impl Environment {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        Ok(Environment {
            config,
            episodes_started: 0,
            state: None,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn state(&self) -> Option<&EpisodeState> {
        self.state.as_ref()
    }

    fn prior(&self) -> Option<[usize; 2]> {
        self.config
            .oracle_cardinality_prior
            .then_some(self.config.blicket_count_range)
    }

    /// Starts episode `episode_index` of `master_seed` and returns the encoded
    /// context panels in generation order.
    pub fn reset(&mut self, master_seed: u64, episode_index: u64) -> Result<ResetOutcome> {
        let spec = generate_episode(master_seed, episode_index, &self.config)?;
        let n = self.config.num_objects;
        let observations = spec
            .context
            .iter()
            .map(|p| ObservationVector::encode(p, n))
            .collect::<Result<Vec<_>>>()?;
        let feasible = FeasibleSet::from_panels(n, &spec.context)?;
        self.episodes_started += 1;
        self.state = Some(EpisodeState {
            spec,
            feasible,
            step_index: 0,
            status: EpisodeStatus::AwaitingFirstAction,
            trial_rng: seeded_rng(master_seed, episode_index, STREAM_TRIALS),
            records: Vec::new(),
        });
        Ok(ResetOutcome {
            episode_id: self.episodes_started,
            observations,
        })
    }

    pub fn oracle_belief(&self) -> Result<OracleBelief> {
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| Error::State("no episode has been reset".into()))?;
        state.feasible.oracle_belief(self.prior())
    }

    pub fn step(&mut self, action: &Action) -> Result<StepOutcome> {
        let prior = self.prior();
        let config = &self.config;
        let n = config.num_objects;
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| Error::State("step called before reset".into()))?;
        if state.status.is_done() {
            return Err(Error::State(format!(
                "episode already finished ({:?})",
                state.status
            )));
        }
        if action.belief.len() != n || action.trial.len() != n {
            return Err(Error::Contract(format!(
                "action has {}+{} entries, expected {n}+{n}",
                action.trial.len(),
                action.belief.len()
            )));
        }

        let truth = state.spec.ground_truth;
        let phase = if state.step_index < config.context_steps() {
            Phase::Context
        } else {
            Phase::Trial
        };
        let solved = is_solved(&action.belief, truth);
        let mut trial = None;

        let (observation, reward, oracle) = if solved {
            let oracle = state.feasible.oracle_belief(prior)?;
            (ObservationVector::zeros(n), config.solve_bonus, oracle)
        } else {
            match phase {
                Phase::Context => {
                    let panel = state.spec.context[state.step_index];
                    let oracle = state.feasible.oracle_belief(prior)?;
                    let reward = step_reward(
                        false,
                        &action.belief,
                        &oracle,
                        config.solve_bonus,
                        config.step_penalty,
                    )?;
                    (ObservationVector::encode(&panel, n)?, reward, oracle)
                }
                Phase::Trial => {
                    let subset = binarize_trial(
                        &action.trial,
                        config.trial_binarization,
                        &mut state.trial_rng,
                    );
                    let panel = Panel::observe(subset, truth);
                    let before = match config.reward_oracle {
                        RewardOracle::PreTrial => Some(state.feasible.oracle_belief(prior)?),
                        RewardOracle::PostTrial => None,
                    };
                    state.feasible.filter(&panel)?;
                    let after = state.feasible.oracle_belief(prior)?;
                    let reference = before.as_ref().unwrap_or(&after);
                    let reward = step_reward(
                        false,
                        &action.belief,
                        reference,
                        config.solve_bonus,
                        config.step_penalty,
                    )?;
                    trial = Some(subset);
                    (ObservationVector::encode(&panel, n)?, reward, after)
                }
            }
        };

        state.step_index += 1;
        state.status = if solved {
            EpisodeStatus::Solved
        } else if state.step_index >= config.max_steps {
            EpisodeStatus::Exhausted
        } else {
            EpisodeStatus::Running
        };
        let done = state.status.is_done();
        let info = StepInfo {
            oracle_belief: oracle,
            feasible_count: state.feasible.count_with(prior),
            solved,
            phase,
            step_index: state.step_index,
            trial_executed: trial.is_some(),
        };
        state.records.push(StepRecord {
            step: state.step_index,
            phase,
            action: action.clone(),
            trial,
            observation: observation.clone(),
            reward,
            oracle_belief: info.oracle_belief.clone(),
            feasible_count: info.feasible_count,
            solved,
            done,
        });
        Ok(StepOutcome {
            observation,
            reward,
            done,
            info,
        })
    }

    /// Full record of the finished episode.
    pub fn export_transcript(&self) -> Result<EpisodeTranscript> {
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| Error::State("no episode has been reset".into()))?;
        if !state.status.is_done() {
            return Err(Error::State("episode is still running".into()));
        }
        Ok(EpisodeTranscript::new(
            self.config.clone(),
            state.spec.clone(),
            state.records.clone(),
        ))
    }
}
