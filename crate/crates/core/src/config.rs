use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::types::{ObjectSpec, MAX_OBJECTS};

/// How the softened trial vector becomes a concrete object subset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialBinarization {
    /// Object `i` is placed iff `trial[i] > 0.5`.
    #[default]
    Threshold,
    /// Object `i` is placed with probability `trial[i]`, drawn from the episode stream.
    Sample,
}

/// Which oracle the auxiliary reward of an unsolved trial step compares against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardOracle {
    /// Oracle including the trial executed on this step.
    #[default]
    PostTrial,
    /// Oracle over the panels seen before this step's trial.
    PreTrial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub num_objects: usize,
    pub num_context_panels: usize,
    /// Step budget `T` of an episode.
    pub max_steps: usize,
    /// Inclusive bounds on the number of Blickets in a ground-truth assignment.
    pub blicket_count_range: [usize; 2],
    /// Inclusive bounds on the number of objects in a context panel.
    pub context_panel_size_range: [usize; 2],
    pub solve_bonus: f64,
    pub step_penalty: f64,
    pub trial_binarization: TrialBinarization,
    /// Restrict oracle hypotheses to `blicket_count_range` cardinalities.
    pub oracle_cardinality_prior: bool,
    pub reward_oracle: RewardOracle,
    /// When set, the first `num_context_panels` steps of the budget replay the
    /// context panels (one per step, trials ignored) before any trial runs.
    pub context_consumes_steps: bool,
    /// Panel-set draws per assignment before the assignment is re-drawn.
    pub panel_attempt_budget: usize,
    pub assignment_attempt_budget: usize,
    /// Informational only; used by external trainers.
    pub discount: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            num_objects: 9,
            num_context_panels: 4,
            max_steps: 10,
            blicket_count_range: [3, 8],
            context_panel_size_range: [2, 6],
            solve_bonus: 20.0,
            step_penalty: -1.0,
            trial_binarization: TrialBinarization::Threshold,
            oracle_cardinality_prior: false,
            reward_oracle: RewardOracle::PostTrial,
            context_consumes_steps: true,
            panel_attempt_budget: 10_000,
            assignment_attempt_budget: 100,
            discount: 0.99,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let n = self.num_objects;
        if n == 0 || n > MAX_OBJECTS || n > ObjectSpec::POOL_SIZE {
            return Err(Error::Config(format!(
                "num_objects must be in 1..={MAX_OBJECTS}, got {n}"
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        let [lo, hi] = self.blicket_count_range;
        if lo > hi || hi > n {
            return Err(Error::Config(format!(
                "blicket_count_range [{lo}, {hi}] is empty or exceeds {n} objects"
            )));
        }
        let [lo, hi] = self.context_panel_size_range;
        if lo > hi || hi > n {
            return Err(Error::Config(format!(
                "context_panel_size_range [{lo}, {hi}] is empty or exceeds {n} objects"
            )));
        }
        if self.panel_attempt_budget == 0 || self.assignment_attempt_budget == 0 {
            return Err(Error::Config("attempt budgets must be positive".into()));
        }
        if !self.solve_bonus.is_finite() || !self.step_penalty.is_finite() {
            return Err(Error::Config("rewards must be finite".into()));
        }
        Ok(())
    }

    /// Number of leading steps that replay context instead of running trials.
    pub fn context_steps(&self) -> usize {
        if self.context_consumes_steps {
            self.num_context_panels.min(self.max_steps)
        } else {
            0
        }
    }

    /// Hex SHA-256 of the canonical JSON form; identifies the config in transcripts and reports.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let hash = Sha256::digest(&canonical);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
