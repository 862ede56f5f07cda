//! Line-delimited JSON protocol over a byte stream (stdio in the CLI).
//!
//! Each non-blank request line gets exactly one response line. Blank lines are
//! skipped. A `close` request is acknowledged and ends the session; so does end
//! of input. See `docs/protocol.md` for the wire reference.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::env::{Environment, StepInfo};
use crate::error::{Error, Result};
use crate::types::{Action, ObservationVector};

pub const PROTOCOL_VERSION: &str = "blicket-stdio/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Reset,
    Step,
    Close,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub cmd: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_index: Option<u64>,
    /// Replaces the session config from this reset on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Config>,
    /// `num_objects` trial entries followed by `num_objects` belief entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<f64>>,
}

impl Request {
    pub fn reset(seed: u64, episode_index: u64) -> Self {
        Request {
            cmd: Command::Reset,
            seed: Some(seed),
            episode_index: Some(episode_index),
            config: None,
            action: None,
        }
    }

    pub fn step(action: &Action) -> Self {
        Request {
            cmd: Command::Step,
            seed: None,
            episode_index: None,
            config: None,
            action: Some(action.to_wire()),
        }
    }

    pub fn close() -> Self {
        Request {
            cmd: Command::Close,
            seed: None,
            episode_index: None,
            config: None,
            action: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<Vec<ObservationVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub done: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info: Option<StepInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_kind: Option<String>,
}

impl Response {
    fn failure(err: &Error) -> Self {
        Response {
            ok: false,
            error: Some(err.to_string()),
            error_kind: Some(err.kind().to_string()),
            ..Response::default()
        }
    }

    /// Serialized form, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("responses serialize")
    }
}

/// One protocol session: a config and at most one open episode.
pub struct Session {
    env: Environment,
    episode_id: Option<u64>,
}

impl Session {
    pub fn new(config: Config) -> Result<Self> {
        Ok(Session {
            env: Environment::new(config)?,
            episode_id: None,
        })
    }

    /// Handles one request line. Returns `None` for blank lines, and whether
    /// the session should keep reading.
    pub fn handle_line(&mut self, line: &str) -> (Option<Response>, bool) {
        if line.trim().is_empty() {
            return (None, true);
        }
        let request = match parse_request(line) {
            Ok(r) => r,
            Err(e) => return (Some(Response::failure(&e)), true),
        };
        let keep_going = request.cmd != Command::Close;
        let response = self
            .handle(request)
            .unwrap_or_else(|e| Response::failure(&e));
        (Some(response), keep_going)
    }

    pub fn handle(&mut self, request: Request) -> Result<Response> {
        match request.cmd {
            Command::Reset => self.reset(request),
            Command::Step => self.step(request),
            Command::Close => Ok(Response {
                ok: true,
                episode_id: self.episode_id,
                closed: Some(true),
                ..Response::default()
            }),
        }
    }

    fn reset(&mut self, request: Request) -> Result<Response> {
        if let Some(config) = request.config {
            self.env = Environment::new(config)?;
        }
        let outcome = self.env.reset(
            request.seed.unwrap_or(0),
            request.episode_index.unwrap_or(0),
        )?;
        self.episode_id = Some(outcome.episode_id);
        Ok(Response {
            ok: true,
            protocol_version: Some(PROTOCOL_VERSION.to_string()),
            episode_id: Some(outcome.episode_id),
            config_digest: Some(self.env.config().digest()),
            observations: Some(outcome.observations),
            ..Response::default()
        })
    }

    fn step(&mut self, request: Request) -> Result<Response> {
        if self.episode_id.is_none() {
            return Err(Error::State("step before reset".into()));
        }
        let wire = request
            .action
            .ok_or_else(|| Error::Contract("step needs an `action` array".into()))?;
        let action = Action::from_wire(&wire, self.env.config().num_objects)?;
        let outcome = self.env.step(&action)?;
        Ok(Response {
            ok: true,
            episode_id: self.episode_id,
            observation: Some(outcome.observation),
            reward: Some(outcome.reward),
            done: Some(outcome.done),
            info: Some(outcome.info),
            ..Response::default()
        })
    }
}

fn parse_request(line: &str) -> Result<Request> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| Error::json("request is not valid JSON", e))?;
    serde_json::from_value(value).map_err(|e| Error::Contract(format!("malformed request: {e}")))
}

/// Runs a session until `close` or end of input, writing one line per response.
pub fn serve<R: BufRead, W: Write>(config: Config, reader: R, mut writer: W) -> Result<()> {
    let mut session = Session::new(config)?;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("reading request", e))?;
        let (response, keep_going) = session.handle_line(&line);
        if let Some(response) = response {
            writeln!(writer, "{}", response.to_line())
                .map_err(|e| Error::io("writing response", e))?;
            writer
                .flush()
                .map_err(|e| Error::io("flushing response", e))?;
        }
        if !keep_going {
            break;
        }
    }
    Ok(())
}
