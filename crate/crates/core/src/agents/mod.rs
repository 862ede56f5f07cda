//! Heuristic agents behind one contract.
//!
//! An agent is handed the context panels at the start of an episode, emits
//! an [`Action`] every step, and is told the panel of every trial that the
//! environment actually executed. All randomness flows through the stream
//! passed to [`Agent::reset`].

mod bayes;
mod naive;
mod random;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::types::{Action, Panel};

pub use bayes::{naive_bayes_belief, BayesAgent};
pub use naive::{Knowledge, NaiveAgent};
pub use random::RandomAgent;
pub use search::{most_uncertain, SearchNaiveAgent, SearchRandomAgent};

pub trait Agent: Send {
    fn name(&self) -> &'static str;

    /// Starts a new episode from its context panels.
    fn reset(&mut self, context: &[Panel], rng: SeededRng);

    fn act(&mut self) -> Action;

    /// Outcome of a trial the environment executed.
    fn observe(&mut self, panel: &Panel);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Random,
    Bayes,
    Naive,
    SearchRandom,
    SearchNaive,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Random,
        AgentKind::Bayes,
        AgentKind::Naive,
        AgentKind::SearchRandom,
        AgentKind::SearchNaive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Bayes => "bayes",
            AgentKind::Naive => "naive",
            AgentKind::SearchRandom => "search-random",
            AgentKind::SearchNaive => "search-naive",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown agent {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentOptions {
    /// Naive agent: mark every member of an inactive multi-object panel as a
    /// non-Blicket, not only singleton trials.
    pub naive_inactive_evidence: bool,
}

impl Default for AgentOptions {
    fn default() -> Self {
        AgentOptions {
            naive_inactive_evidence: true,
        }
    }
}

pub fn build_agent(kind: AgentKind, config: &Config, options: &AgentOptions) -> Box<dyn Agent> {
    let n = config.num_objects;
    let prior = config
        .oracle_cardinality_prior
        .then_some(config.blicket_count_range);
    match kind {
        AgentKind::Random => Box::new(RandomAgent::new(n)),
        AgentKind::Bayes => Box::new(BayesAgent::new(n)),
        AgentKind::Naive => Box::new(NaiveAgent::new(n, options.naive_inactive_evidence)),
        AgentKind::SearchRandom => Box::new(SearchRandomAgent::new(n, prior)),
        AgentKind::SearchNaive => Box::new(SearchNaiveAgent::new(n, prior)),
    }
}
