//! Messages between the planner and the agents. Everything travels over the
//! simulated bus as one JSON object per message, tagged by `kind`.

use serde::{Deserialize, Serialize};
use skycrew_bt::NodeStatus;

use crate::domain::{PlanEntry, TaskId, TaskProgress, ToolId, UavId};
use crate::geometry::Point3;
use crate::scalar::Scalar;

/// A vehicle's share of a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct TaskList<S> {
    pub uav: UavId,
    pub version: u64,
    pub entries: Vec<PlanEntry<S>>,
    pub mission_over: bool,
}

/// Per-tick status report of an agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Feedback<S> {
    pub uav: UavId,
    pub bt_status: NodeStatus,
    pub battery: S,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_task: Option<TaskId>,
    pub timestamp: S,
    pub position: Point3<S>,
    /// Version of the task list the agent is executing.
    pub plan_version: u64,
    /// Tasks left in the agent's queue, the running one included.
    #[serde(default)]
    pub queued: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub progress: Option<TaskProgress<S>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carried_tool: Option<ToolId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum ReportBody<S> {
    /// Outcome of one task.
    TaskOutcome {
        task: TaskId,
        success: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
    /// The battery dropped far faster than the model allows.
    BatteryFault { level: S },
}

/// A report the agent keeps resending until the planner acknowledges it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Report<S> {
    pub uav: UavId,
    pub seq: u64,
    pub timestamp: S,
    #[serde(flatten)]
    pub body: ReportBody<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Message<S> {
    TaskList(TaskList<S>),
    /// Every report of `uav` up to `seq` was received.
    Ack { uav: UavId, seq: u64 },
    Feedback(Feedback<S>),
    Report(Report<S>),
}

impl<S: Scalar> Message<S> {
    /// The vehicle at the far end of the message.
    pub fn uav(&self) -> &UavId {
        match self {
            Message::TaskList(t) => &t.uav,
            Message::Ack { uav, .. } => uav,
            Message::Feedback(f) => &f.uav,
            Message::Report(r) => &r.uav,
        }
    }

    /// Whether the message travels from the planner down to an agent.
    pub fn is_downlink(&self) -> bool {
        matches!(self, Message::TaskList(_) | Message::Ack { .. })
    }
}
