//! JSON message schema spoken over `/session`.
//!
//! Every message is one JSON object with a `type` tag, the
//! `protocol_version`, and (after the hello exchange) the `session` id.

use gsc_core::channel::ChannelConfig;
use gsc_core::{ControllerKind, Metrics, Outcome, ScenarioSpec, TraceRecord, WorldState};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

/// Messages a client may send.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientBody {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client: Option<String>,
        /// Reattach to a parked session.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resume: Option<String>,
    },
    ScenarioList {},
    Start {
        scenario: String,
        controller: ControllerKind,
        #[serde(default)]
        seed: u64,
        /// Simulation steps per wall-clock second.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tick_hz: Option<f64>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        paused: bool,
    },
    OperatorInput {
        vx: f64,
        vy: f64,
        /// Step the input applies from; defaults to the step about to run.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<u64>,
    },
    ConfigUpdate(ConfigPatch),
    Reset {},
}

/// Fields left out keep their current value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paused: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub id: String,
    pub description: String,
}

/// Live channel and controller settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    pub drop: f64,
    pub lag: u64,
    pub noise: f64,
    pub controller: ControllerKind,
    pub paused: bool,
}

impl LiveConfig {
    pub fn new(channel: &ChannelConfig, controller: ControllerKind, paused: bool) -> Self {
        Self { drop: channel.drop_probability, lag: channel.lag_steps, noise: channel.noise_std, controller, paused }
    }
}

/// Messages the server sends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerBody {
    Hello {
        server: String,
        tick_hz: f64,
        resumed: bool,
    },
    ScenarioList {
        scenarios: Vec<ScenarioEntry>,
    },
    /// Acknowledges `start`; carries the full scenario for drawing.
    Start {
        scenario: String,
        controller: ControllerKind,
        seed: u64,
        tick_hz: f64,
        spec: Box<ScenarioSpec>,
    },
    /// Acknowledges a successful `config_update` with the settings now in force.
    ConfigUpdate(LiveConfig),
    StateSnapshot(Box<Snapshot>),
    RunEnded {
        outcome: Outcome,
        metrics: Metrics,
    },
    /// Acknowledges `reset`; the next snapshot is step 0.
    Reset {},
    Error {
        code: String,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Steps executed so far; `world` is the state at this step.
    pub step: u64,
    pub world: WorldState,
    /// What happened during the previous step: raw and delivered operator
    /// input, autonomy and shared commands, and the predicted modes.
    pub last: Option<TraceRecord>,
    pub operator_belief: Vec<f64>,
    pub metrics: Option<Metrics>,
    pub config: LiveConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<B> {
    pub protocol_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    #[serde(flatten)]
    pub body: B,
}

pub type ClientMessage = Envelope<ClientBody>;
pub type ServerMessage = Envelope<ServerBody>;

impl<B> Envelope<B> {
    pub fn new(session: Option<String>, body: B) -> Self {
        Self { protocol_version: PROTOCOL_VERSION, session, body }
    }
}

impl<B: Serialize> Envelope<B> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }
}

/// A protocol-level failure reported back to the client.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolError {
    pub code: &'static str,
    pub message: String,
}

impl ProtocolError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn body(&self) -> ServerBody {
        ServerBody::Error { code: self.code.to_string(), message: self.message.clone() }
    }
}

impl From<gsc_core::Error> for ProtocolError {
    fn from(e: gsc_core::Error) -> Self {
        Self { code: e.code(), message: e.to_string() }
    }
}

/// Parse a client message, checking the version.
pub fn parse_client(text: &str) -> Result<ClientMessage, ProtocolError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ProtocolError::new("bad-message", format!("not JSON: {e}")))?;
    match value.get("protocol_version").and_then(|v| v.as_u64()) {
        Some(v) if v == PROTOCOL_VERSION as u64 => {}
        Some(v) => {
            return Err(ProtocolError::new(
                "bad-version",
                format!("protocol_version {v} is not supported; expected {PROTOCOL_VERSION}"),
            ))
        }
        None => return Err(ProtocolError::new("bad-message", "missing protocol_version")),
    }
    serde_json::from_value(value).map_err(|e| ProtocolError::new("bad-message", e.to_string()))
}

/// Parse a server message (used by clients and tests).
pub fn parse_server(text: &str) -> Result<ServerMessage, ProtocolError> {
    serde_json::from_str(text).map_err(|e| ProtocolError::new("bad-message", e.to_string()))
}
