//! The mission log: one JSON object per line, in the order things happened.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::agent::EmergencyCause;
use crate::domain::{ActionId, ActionParams, ActionRequest, Event, Plan, UavId};
use crate::planner::ReplanCause;
use crate::protocol::Feedback;
use crate::scalar::Scalar;
use crate::scenario::{Fault, ScenarioConfig};

use super::snapshot::Snapshot;
use super::world::WorldEvent;

/// A state-changing operator command, applied at a step boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Command<S> {
    SubmitAction { action: ActionRequest<S> },
    ModifyAction { action: ActionId, params: ActionParams<S> },
    InjectFault { fault: Fault<S> },
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndOutcome {
    /// Everything served or unassignable, vehicles home.
    Completed,
    /// Scenario duration reached with work left.
    TimedOut,
    /// Stopped on request before either.
    Stopped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Record<S> {
    /// First line of every log: everything needed to re-run the mission.
    Header { scenario: ScenarioConfig<S> },
    Command {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client: Option<String>,
        #[serde(flatten)]
        command: Command<S>,
    },
    Injected { fault: Fault<S> },
    Link { uav: UavId, up: bool },
    /// An event the planner accepted.
    Event { event: Event<S> },
    Rejected { event: Event<S>, reason: String },
    Replan { version: u64, causes: Vec<ReplanCause>, plan: Plan<S> },
    /// Agent feedback, sampled once per simulated second.
    Feedback { feedback: Feedback<S> },
    Emergency { uav: UavId, cause: EmergencyCause },
    World { event: WorldEvent<S> },
    End { outcome: EndOutcome, snapshot: Snapshot<S> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct LogEntry<S> {
    pub index: u64,
    pub step: u64,
    pub time: S,
    #[serde(flatten)]
    pub record: Record<S>,
}

impl<S: Scalar> LogEntry<S> {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log entries serialize")
    }

    pub fn kind(&self) -> &'static str {
        match self.record {
            Record::Header { .. } => "header",
            Record::Command { .. } => "command",
            Record::Injected { .. } => "injected",
            Record::Link { .. } => "link",
            Record::Event { .. } => "event",
            Record::Rejected { .. } => "rejected",
            Record::Replan { .. } => "replan",
            Record::Feedback { .. } => "feedback",
            Record::Emergency { .. } => "emergency",
            Record::World { .. } => "world",
            Record::End { .. } => "end",
        }
    }
}

pub fn write_log<S: Scalar>(out: &mut impl Write, entries: &[LogEntry<S>]) -> io::Result<()> {
    for e in entries {
        writeln!(out, "{}", e.to_line())?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Read a log, one entry per non-empty line.
pub fn read_log<S: Scalar>(input: impl BufRead) -> Result<Vec<(String, LogEntry<S>)>, LogError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|source| LogError::Parse { line: i + 1, source })?;
        out.push((line, e));
    }
    Ok(out)
}
