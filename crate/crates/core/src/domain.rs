//! Shared vocabulary: actions, tasks, vehicles, plans and events.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::Point3;
use crate::scalar::Scalar;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_type!(UavId);
id_type!(ActionId);
id_type!(TaskId);
id_type!(WorkerId);
id_type!(ToolId);
id_type!(
    /// Links tasks that must start at the same planned instant.
    SyncGroupId
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Inspection,
    Monitoring,
    PhysicalInteraction,
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Capability::Inspection => "inspection",
            Capability::Monitoring => "monitoring",
            Capability::PhysicalInteraction => "physical_interaction",
        })
    }
}

/// A rule broken by some entity of a scenario or message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
    /// Reported but not blocking.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub advisory: bool,
}

impl Violation {
    pub fn new(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { entity: entity.into(), rule: rule.into(), advisory: false }
    }

    pub fn advisory(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { advisory: true, ..Self::new(entity, rule) }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Inspect,
    Monitor,
    Deliver,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum ActionParams<S> {
    Inspect { waypoints: Vec<Point3<S>> },
    Monitor { worker: WorkerId, vehicles: u32, duration: S },
    Deliver { tool: ToolId, worker: WorkerId },
}

impl<S: Scalar> ActionParams<S> {
    pub fn kind(&self) -> ActionKind {
        match self {
            ActionParams::Inspect { .. } => ActionKind::Inspect,
            ActionParams::Monitor { .. } => ActionKind::Monitor,
            ActionParams::Deliver { .. } => ActionKind::Deliver,
        }
    }

    pub fn violations(&self, entity: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            ActionParams::Inspect { waypoints } => {
                if waypoints.is_empty() {
                    out.push(Violation::new(entity, "inspect needs at least one waypoint"));
                }
                if waypoints.iter().any(|p| !p.is_finite()) {
                    out.push(Violation::new(entity, "waypoints must be finite"));
                }
            }
            ActionParams::Monitor { vehicles, duration, .. } => {
                if *vehicles < 1 {
                    out.push(Violation::new(entity, "vehicle count >= 1"));
                }
                if !(duration.is_finite() && *duration > S::zero()) {
                    out.push(Violation::new(entity, "duration > 0"));
                }
            }
            ActionParams::Deliver { .. } => {}
        }
        out
    }
}

/// Operator-issued high-level action. Lower weight is served earlier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ActionRequest<S> {
    pub id: ActionId,
    pub weight: S,
    #[serde(default)]
    pub arrival_time: S,
    #[serde(flatten)]
    pub params: ActionParams<S>,
}

impl<S: Scalar> ActionRequest<S> {
    pub fn kind(&self) -> ActionKind {
        self.params.kind()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let entity = format!("action {}", self.id);
        let mut out = Vec::new();
        if !(self.weight.is_finite() && self.weight > S::zero()) {
            out.push(Violation::new(&entity, "weight > 0"));
        }
        if !(self.arrival_time.is_finite() && self.arrival_time >= S::zero()) {
            out.push(Violation::new(&entity, "arrival_time >= 0"));
        }
        out.extend(self.params.violations(&entity));
        out
    }

    /// Queue order: weight, then arrival time, then id.
    pub fn queue_cmp(&self, other: &Self) -> Ordering {
        priority_cmp((self.weight, self.arrival_time, self.id.as_str()), (other.weight, other.arrival_time, other.id.as_str()))
    }
}

pub(crate) fn priority_cmp<S: Scalar>(a: (S, S, &str), b: (S, S, &str)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
        .then(a.2.cmp(b.2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Inspect,
    Monitor,
    Deliver,
    Recharge,
    Wait,
}

impl TaskKind {
    pub fn is_artificial(self) -> bool {
        matches!(self, TaskKind::Recharge | TaskKind::Wait)
    }

    pub fn required_capability(self) -> Option<Capability> {
        match self {
            TaskKind::Inspect => Some(Capability::Inspection),
            TaskKind::Monitor => Some(Capability::Monitoring),
            TaskKind::Deliver => Some(Capability::PhysicalInteraction),
            TaskKind::Recharge | TaskKind::Wait => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TaskKind::Inspect => "Inspect",
            TaskKind::Monitor => "Monitoring",
            TaskKind::Deliver => "Delivery",
            TaskKind::Recharge => "Recharge",
            TaskKind::Wait => "Wait",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Work<S> {
    Waypoints(Vec<Point3<S>>),
    Duration(S),
}

/// Portion of a logical task carried by one schedulable piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "span", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Span<S> {
    Whole,
    /// Indices into the logical task's waypoint list.
    Waypoints { indices: Vec<usize> },
    /// Seconds `[from, to)` of the logical task's monitoring time.
    Coverage { from: S, to: S },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Origin<S> {
    pub task: TaskId,
    #[serde(flatten)]
    pub span: Span<S>,
}

/// Who and what a task is about. `offset` is the standoff from the worker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Target<S> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker: Option<WorkerId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool: Option<ToolId>,
    pub offset: Point3<S>,
}

/// Schedulable unit, derived from an action or inserted by the planner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Task<S> {
    pub id: TaskId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_action: Option<ActionId>,
    pub kind: TaskKind,
    pub start_location: Point3<S>,
    pub work: Work<S>,
    pub required_capability: Option<Capability>,
    pub divisible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sync_group: Option<SyncGroupId>,
    /// Priority inherited from the action; zero for artificial tasks.
    #[serde(default)]
    pub weight: S,
    #[serde(default)]
    pub arrival_time: S,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target<S>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin<S>>,
    /// Earliest departure, used to keep split monitoring contiguous.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_before: Option<S>,
}

impl<S: Scalar> Task<S> {
    /// A Recharge at `station`, taking `duration` once landed.
    pub fn recharge(id: TaskId, station: Point3<S>, duration: S) -> Self {
        Self::artificial(id, TaskKind::Recharge, station, duration)
    }

    /// A Wait at `spot` lasting `duration` once there.
    pub fn wait(id: TaskId, spot: Point3<S>, duration: S) -> Self {
        Self::artificial(id, TaskKind::Wait, spot, duration)
    }

    fn artificial(id: TaskId, kind: TaskKind, at: Point3<S>, duration: S) -> Self {
        Self {
            id,
            source_action: None,
            kind,
            start_location: at,
            work: Work::Duration(duration),
            required_capability: None,
            divisible: false,
            sync_group: None,
            weight: S::zero(),
            arrival_time: S::zero(),
            target: None,
            origin: None,
            not_before: None,
        }
    }

    pub fn waypoints(&self) -> &[Point3<S>] {
        match &self.work {
            Work::Waypoints(w) => w,
            Work::Duration(_) => &[],
        }
    }

    pub fn hold_duration(&self) -> S {
        match &self.work {
            Work::Waypoints(_) => S::zero(),
            Work::Duration(d) => *d,
        }
    }

    /// Logical task this piece belongs to (itself when unsplit or artificial).
    pub fn logical_id(&self) -> &TaskId {
        self.origin.as_ref().map_or(&self.id, |o| &o.task)
    }

    pub fn queue_cmp(&self, other: &Self) -> Ordering {
        priority_cmp((self.weight, self.arrival_time, self.id.as_str()), (other.weight, other.arrival_time, other.id.as_str()))
    }

    pub fn violations(&self) -> Vec<Violation> {
        let entity = format!("task {}", self.id);
        let mut out = Vec::new();
        if self.kind.is_artificial() && self.source_action.is_some() {
            out.push(Violation::new(&entity, "artificial tasks have no source action"));
        }
        if self.divisible && !matches!(self.kind, TaskKind::Inspect | TaskKind::Monitor) {
            out.push(Violation::new(&entity, "only inspect and monitor tasks are divisible"));
        }
        if self.required_capability != self.kind.required_capability() {
            out.push(Violation::new(&entity, "required capability must match the task kind"));
        }
        match (&self.work, self.kind) {
            (Work::Waypoints(w), TaskKind::Inspect) if !w.is_empty() => {}
            (Work::Waypoints(_), _) => out.push(Violation::new(&entity, "waypoint work only for non-empty inspect")),
            (Work::Duration(_), TaskKind::Inspect) => out.push(Violation::new(&entity, "inspect work is a waypoint list")),
            (Work::Duration(d), _) if !(d.is_finite() && *d >= S::zero()) => {
                out.push(Violation::new(&entity, "duration >= 0"))
            }
            _ => {}
        }
        out
    }
}

/// Static description of one vehicle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct UavSpec<S> {
    pub id: UavId,
    pub capabilities: BTreeSet<Capability>,
    pub speed: S,
    pub battery_capacity: S,
    pub travel_rate: S,
    pub hover_rate: S,
    pub reserve_fraction: S,
    pub station: Point3<S>,
}

impl<S: Scalar> UavSpec<S> {
    pub fn reserve(&self) -> S {
        self.reserve_fraction * self.battery_capacity
    }

    pub fn can(&self, required: Option<Capability>) -> bool {
        required.is_none_or(|c| self.capabilities.contains(&c))
    }

    pub fn violations(&self) -> Vec<Violation> {
        let entity = format!("uav {}", self.id);
        let mut out = Vec::new();
        let pos = |v: S| v.is_finite() && v > S::zero();
        let nonneg = |v: S| v.is_finite() && v >= S::zero();
        if self.capabilities.is_empty() {
            out.push(Violation::new(&entity, "capabilities non-empty"));
        }
        if !pos(self.speed) {
            out.push(Violation::new(&entity, "speed > 0"));
        }
        if !pos(self.battery_capacity) {
            out.push(Violation::new(&entity, "battery_capacity > 0"));
        }
        if !nonneg(self.travel_rate) {
            out.push(Violation::new(&entity, "travel_rate >= 0"));
        }
        if !nonneg(self.hover_rate) {
            out.push(Violation::new(&entity, "hover_rate >= 0"));
        }
        if !(nonneg(self.reserve_fraction) && self.reserve_fraction < S::one()) {
            out.push(Violation::new(&entity, "reserve_fraction in [0, 1)"));
        }
        if !self.station.is_finite() {
            out.push(Violation::new(&entity, "station must be finite"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Connectivity<S> {
    Connected,
    Disconnected { since: S },
}

/// Dynamic state of one vehicle as known to its holder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct UavState<S> {
    pub id: UavId,
    pub position: Point3<S>,
    pub battery: S,
    pub connectivity: Connectivity<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carried_tool: Option<ToolId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_task: Option<TaskId>,
    #[serde(default)]
    pub queue: Vec<TaskId>,
}

impl<S: Scalar> UavState<S> {
    /// Landed on its station with a full battery.
    pub fn parked(spec: &UavSpec<S>) -> Self {
        Self {
            id: spec.id.clone(),
            position: spec.station,
            battery: spec.battery_capacity,
            connectivity: Connectivity::Connected,
            carried_tool: None,
            current_task: None,
            queue: Vec::new(),
        }
    }

    pub fn violations(&self, spec: &UavSpec<S>) -> Vec<Violation> {
        let entity = format!("uav {}", self.id);
        let mut out = Vec::new();
        if !(self.battery >= S::zero() && self.battery <= spec.battery_capacity) {
            out.push(Violation::new(&entity, "battery in [0, capacity]"));
        }
        if let Some(cur) = &self.current_task {
            if self.queue.first() != Some(cur) {
                out.push(Violation::new(&entity, "current task is head of queue"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Vehicle<S> {
    pub spec: UavSpec<S>,
    pub state: UavState<S>,
}

/// The set of vehicles available to the planner, keyed by id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Fleet<S> {
    vehicles: BTreeMap<UavId, Vehicle<S>>,
}

impl<S: Scalar> Fleet<S> {
    pub fn new() -> Self {
        Self { vehicles: BTreeMap::new() }
    }

    /// Fleet of parked vehicles. Fails on a repeated id.
    pub fn from_specs(specs: impl IntoIterator<Item = UavSpec<S>>) -> Result<Self, UavId> {
        let mut fleet = Self::new();
        for spec in specs {
            let state = UavState::parked(&spec);
            fleet.insert(spec, state)?;
        }
        Ok(fleet)
    }

    pub fn insert(&mut self, spec: UavSpec<S>, state: UavState<S>) -> Result<(), UavId> {
        if self.vehicles.contains_key(&spec.id) {
            return Err(spec.id);
        }
        self.vehicles.insert(spec.id.clone(), Vehicle { spec, state });
        Ok(())
    }

    pub fn get(&self, id: &UavId) -> Option<&Vehicle<S>> {
        self.vehicles.get(id)
    }

    pub fn get_mut(&mut self, id: &UavId) -> Option<&mut Vehicle<S>> {
        self.vehicles.get_mut(id)
    }

    pub fn remove(&mut self, id: &UavId) -> Option<Vehicle<S>> {
        self.vehicles.remove(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vehicle<S>> {
        self.vehicles.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &UavId> {
        self.vehicles.keys()
    }

    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn contains(&self, id: &UavId) -> bool {
        self.vehicles.contains_key(id)
    }
}

/// How far a running task has progressed, as reported by its agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "progress", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum TaskProgress<S> {
    /// Index of the next waypoint still to visit.
    Inspect { next_waypoint: usize },
    /// Seconds of holding already done (monitor, wait, recharge swap).
    Hold { elapsed: S },
    Deliver { picked: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct PlanEntry<S> {
    pub task: Task<S>,
    pub est_start: S,
    pub est_end: S,
    pub est_battery_at_start: S,
    pub est_battery_at_end: S,
    /// Set on a preserved running task: the progress estimates start from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume: Option<TaskProgress<S>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnassignableReason {
    NoCapableVehicle,
    /// Capable vehicles exist but all are taken by the task's sync group.
    NotEnoughVehicles,
    ExceedsBatteryCapacity,
    /// Given up after repeated controller failures.
    RepeatedFailure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unassignable {
    pub task: TaskId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_action: Option<ActionId>,
    pub reason: UnassignableReason,
}

/// Per-vehicle ordered task lists with their estimated timeline.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Plan<S> {
    pub version: u64,
    pub created_at: S,
    pub assignments: BTreeMap<UavId, Vec<PlanEntry<S>>>,
    #[serde(default)]
    pub unassignable: Vec<Unassignable>,
}

impl<S: Scalar> Plan<S> {
    pub fn entries(&self, uav: &UavId) -> &[PlanEntry<S>] {
        self.assignments.get(uav).map_or(&[], Vec::as_slice)
    }

    pub fn kinds(&self, uav: &UavId) -> Vec<TaskKind> {
        self.entries(uav).iter().map(|e| e.task.kind).collect()
    }

    pub fn all_entries(&self) -> impl Iterator<Item = (&UavId, &PlanEntry<S>)> {
        self.assignments.iter().flat_map(|(u, es)| es.iter().map(move |e| (u, e)))
    }

    pub fn find(&self, task: &TaskId) -> Option<(&UavId, &PlanEntry<S>)> {
        self.all_entries().find(|(_, e)| &e.task.id == task)
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.values().all(Vec::is_empty)
    }

    /// Same schedule, ignoring the version counter and creation time.
    pub fn same_schedule(&self, other: &Self) -> bool {
        self.assignments == other.assignments && self.unassignable == other.unassignable
    }
}

/// The three cost terms of one bid. `j1` is infinite for an incapable vehicle;
/// infinities travel as JSON `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostBreakdown<S> {
    j1: S,
    j2: S,
    j3: S,
    total: S,
}

impl<S: Scalar> CostBreakdown<S> {
    pub fn new(j1: S, j2: S, j3: S) -> Self {
        Self { j1, j2, j3, total: j1 + j2 + j3 }
    }

    pub fn infeasible() -> Self {
        Self::new(S::infinity(), S::zero(), S::zero())
    }

    pub fn j1(&self) -> S {
        self.j1
    }

    pub fn j2(&self) -> S {
        self.j2
    }

    pub fn j3(&self) -> S {
        self.j3
    }

    pub fn total(&self) -> S {
        self.total
    }

    pub fn is_feasible(&self) -> bool {
        self.total.is_finite()
    }
}

#[derive(Serialize, Deserialize)]
struct CostWire {
    j1: Option<f64>,
    j2: Option<f64>,
    j3: Option<f64>,
    total: Option<f64>,
}

fn finite_or_none<S: Scalar>(v: S) -> Option<f64> {
    v.is_finite().then(|| v.as_f64())
}

impl<S: Scalar> Serialize for CostBreakdown<S> {
    fn serialize<Z: Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        CostWire {
            j1: finite_or_none(self.j1),
            j2: finite_or_none(self.j2),
            j3: finite_or_none(self.j3),
            total: finite_or_none(self.total),
        }
        .serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for CostBreakdown<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = CostWire::deserialize(d)?;
        let get = |v: Option<f64>| v.map_or(S::infinity(), S::lit);
        Ok(Self::new(get(w.j1), get(w.j2), get(w.j3)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum EventKind<S> {
    TaskFinished { uav: UavId, task: TaskId },
    TaskFailed { uav: UavId, task: TaskId, reason: String },
    NewAction { action: ActionRequest<S> },
    ActionParamsModified { action: ActionId, params: ActionParams<S> },
    Disconnected { uav: UavId },
    Reconnected { uav: UavId },
    BatteryFault { uav: UavId, level: S },
}

/// Something the planner has to react to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Event<S> {
    pub timestamp: S,
    #[serde(flatten)]
    pub kind: EventKind<S>,
}

impl<S: Scalar> Event<S> {
    pub fn new(timestamp: S, kind: EventKind<S>) -> Self {
        Self { timestamp, kind }
    }

    pub fn uav(&self) -> Option<&UavId> {
        match &self.kind {
            EventKind::TaskFinished { uav, .. }
            | EventKind::TaskFailed { uav, .. }
            | EventKind::Disconnected { uav }
            | EventKind::Reconnected { uav }
            | EventKind::BatteryFault { uav, .. } => Some(uav),
            EventKind::NewAction { .. } | EventKind::ActionParamsModified { .. } => None,
        }
    }
}
