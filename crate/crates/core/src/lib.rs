//! Blicket-detection environment: a seeded episode generator, an exact
//! belief oracle over all Blicket assignments, the reset/step state machine,
//! five heuristic agents, a batch evaluation harness and a line-delimited
//! JSON protocol for driving episodes from another process.

pub mod agents;
pub mod config;
pub mod divergence;
pub mod env;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod protocol;
pub mod rng;
pub mod sampler;
pub mod transcript;
pub mod types;

pub use config::{Config, RewardOracle, TrialBinarization};
pub use env::{Environment, EpisodeStatus, Phase, ResetOutcome, StepInfo, StepOutcome};
pub use error::{Error, Result};
pub use oracle::{is_consistent, is_solved, FeasibleSet, OracleBelief};
pub use protocol::{serve, Request, Response, Session, PROTOCOL_VERSION};
pub use sampler::{generate_episode, EpisodeSpec, QueryLabel};
pub use transcript::{replay, EpisodeTranscript, ReplayVerdict};
pub use types::{
    Action, BeliefVector, BlicketAssignment, ObjectSet, ObjectSpec, ObservationVector, Panel,
    TrialVector,
};
