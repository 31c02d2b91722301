//! Consistent views of the mission state at a step boundary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use skycrew_bt::NodeStatus;

use crate::domain::{ActionId, ActionRequest, Plan, TaskId, TaskKind, ToolId, UavId, WorkerId};
use crate::geometry::Point3;
use crate::scalar::Scalar;
use crate::scenario::Tower;

use super::world::LinkState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct VehicleView<S> {
    pub id: UavId,
    pub position: Point3<S>,
    pub battery: S,
    pub battery_capacity: S,
    pub reserve: S,
    pub station: Point3<S>,
    pub landed: bool,
    pub grounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carried_tool: Option<ToolId>,
    pub link: LinkState<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bt_status: Option<NodeStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_task: Option<TaskId>,
    /// The agent's own queue, which may lag the plan.
    pub queue: Vec<TaskId>,
    pub plan_version: u64,
    /// Whether the planner currently plans with this vehicle.
    pub available: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub id: TaskId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionId>,
    pub kind: TaskKind,
    pub complete: bool,
    pub failures: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Snapshot<S> {
    pub step: u64,
    pub time: S,
    pub mission_over: bool,
    pub vehicles: Vec<VehicleView<S>>,
    pub workers: BTreeMap<WorkerId, Point3<S>>,
    pub towers: Vec<Tower<S>>,
    pub plan: Plan<S>,
    /// Actions received so far, in queue order.
    pub actions: Vec<ActionRequest<S>>,
    pub tasks: Vec<TaskView>,
    /// Number of log entries written so far.
    pub log_len: u64,
}
