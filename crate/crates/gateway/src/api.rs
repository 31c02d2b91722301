//! Wire types. Every payload is one JSON object.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use skycrew_core::domain::{ActionId, ActionParams, ActionRequest};
use skycrew_core::scenario::Fault;
use skycrew_core::sim::{Command, CommandError, EndOutcome};
use skycrew_core::Snapshot;

/// What an operator can ask for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GatewayCommand {
    SubmitAction { action: ActionRequest<f64> },
    ModifyAction { action: ActionId, params: ActionParams<f64> },
    InjectFault { fault: Fault<f64> },
    Pause,
    Resume,
    /// Simulated seconds per wall-clock second; `null` runs unthrottled.
    SetSpeed { speed: Option<f64> },
}

impl GatewayCommand {
    /// The mission command behind this request, if it is one.
    pub fn into_mission(self) -> Result<Command<f64>, Self> {
        match self {
            GatewayCommand::SubmitAction { action } => Ok(Command::SubmitAction { action }),
            GatewayCommand::ModifyAction { action, params } => Ok(Command::ModifyAction { action, params }),
            GatewayCommand::InjectFault { fault } => Ok(Command::InjectFault { fault }),
            other => Err(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client: Option<String>,
    #[serde(flatten)]
    pub command: GatewayCommand,
}

impl CommandRequest {
    pub fn new(command: GatewayCommand) -> Self {
        Self { client: None, command }
    }
}

/// A command was accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    /// Step at whose start the command takes effect.
    pub applied_at: u64,
    /// Simulated time when the driver received it.
    pub received_at: f64,
}

/// A command was refused; nothing was applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub code: String,
    pub detail: String,
}

impl Rejection {
    pub fn new(code: &str, detail: impl Into<String>) -> Self {
        Self { code: code.to_owned(), detail: detail.into() }
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        Self::new("bad_request", detail)
    }

    pub fn driver_stopped() -> Self {
        Self::new("driver_stopped", "the mission driver is no longer running")
    }
}

impl From<CommandError> for Rejection {
    fn from(e: CommandError) -> Self {
        Self { code: e.code.to_owned(), detail: e.detail }
    }
}

/// Answer to a command sent over the WebSocket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reply", rename_all = "snake_case")]
pub enum Reply {
    Ack(Ack),
    Rejected(Rejection),
}

/// Driver state next to the snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub step: u64,
    pub time: f64,
    pub paused: bool,
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ended: Option<EndOutcome>,
    /// False once the driver thread has exited.
    pub running: bool,
}

/// Body of `GET /snapshot`.
#[derive(Debug, Serialize)]
pub struct SnapshotBody<'a> {
    pub status: &'a Status,
    pub snapshot: &'a Snapshot,
    /// The last log entries up to the snapshot, oldest first.
    pub events: Vec<Box<RawValue>>,
}
