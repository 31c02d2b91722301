//! Scenario documents: fleet, world layout, action and fault scripts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::domain::{ActionId, ActionParams, ActionRequest, Capability, UavId, UavSpec, Violation, WorkerId};
use crate::geometry::Point3;
use crate::planner::PlannerConfig;
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

/// Rule reported when no vehicle can ever serve an action. Advisory: such
/// actions end up unassignable rather than blocking the run.
pub const NO_CAPABLE_VEHICLE: &str = "no capable vehicle";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Tower<S> {
    pub id: String,
    pub position: Point3<S>,
    pub height: S,
}

/// A scripted position of a worker; between points the worker moves linearly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct RoutePoint<S> {
    pub at: S,
    pub position: Point3<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct WorkerSpec<S> {
    pub id: WorkerId,
    pub position: Point3<S>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub route: Vec<RoutePoint<S>>,
}

impl<S: Scalar> WorkerSpec<S> {
    /// Position at time `t`.
    pub fn position_at(&self, t: S) -> Point3<S> {
        let mut prev = (S::zero(), self.position);
        for p in &self.route {
            if t < p.at {
                let span = p.at - prev.0;
                if span <= S::zero() {
                    return p.position;
                }
                let f = (t - prev.0) / span;
                return prev.1 + (p.position - prev.1) * f;
            }
            prev = (p.at, p.position);
        }
        prev.1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Layout<S> {
    #[serde(default)]
    pub towers: Vec<Tower<S>>,
    #[serde(default)]
    pub workers: Vec<WorkerSpec<S>>,
}

/// Overrides of a vehicle's state at time 0. Defaults to parked and full.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct InitialState<S> {
    #[serde(default)]
    pub position: Option<Point3<S>>,
    #[serde(default)]
    pub battery: Option<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fault", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Fault<S> {
    CommDown { uav: UavId, duration: S },
    BatteryDrop { uav: UavId, level: S },
    /// The next controller command of the vehicle fails.
    ControllerFailure { uav: UavId },
    ActionRequest { action: ActionRequest<S> },
    ParamChange { action: ActionId, params: ActionParams<S> },
}

impl<S: Scalar> Fault<S> {
    pub fn uav(&self) -> Option<&UavId> {
        match self {
            Fault::CommDown { uav, .. } | Fault::BatteryDrop { uav, .. } | Fault::ControllerFailure { uav } => {
                Some(uav)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ScheduledFault<S> {
    pub at: S,
    #[serde(flatten)]
    pub fault: Fault<S>,
}

/// Message loss on the simulated link, on top of scripted drop-outs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct LinkConfig<S> {
    #[serde(default = "S::zero")]
    pub loss_probability: S,
}

impl<S: Scalar> Default for LinkConfig<S> {
    fn default() -> Self {
        Self { loss_probability: S::zero() }
    }
}

fn default_dt<S: Scalar>() -> S {
    S::lit(0.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ScenarioConfig<S> {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub duration: S,
    #[serde(default = "default_dt")]
    pub dt: S,
    pub fleet: Vec<UavSpec<S>>,
    #[serde(default)]
    pub initial: BTreeMap<UavId, InitialState<S>>,
    #[serde(default)]
    pub world: Layout<S>,
    /// Each action is submitted at its `arrival_time`.
    #[serde(default)]
    pub actions: Vec<ActionRequest<S>>,
    #[serde(default)]
    pub faults: Vec<ScheduledFault<S>>,
    #[serde(default)]
    pub planner: PlannerConfig<S>,
    #[serde(default)]
    pub agent: AgentConfig<S>,
    #[serde(default)]
    pub link: LinkConfig<S>,
}

impl<S: Scalar> ScenarioConfig<S> {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn spec(&self, id: &UavId) -> Option<&UavSpec<S>> {
        self.fleet.iter().find(|u| &u.id == id)
    }
}

fn check_action<S: Scalar>(
    a: &ActionRequest<S>,
    workers: &BTreeSet<&WorkerId>,
    fleet: &[UavSpec<S>],
    at: S,
    s: &ScenarioConfig<S>,
    out: &mut Vec<Violation>,
) {
    let entity = format!("action {}", a.id);
    out.extend(a.violations());
    if at > s.duration {
        out.push(Violation::new(&entity, "time within duration"));
    }
    let worker = match &a.params {
        ActionParams::Monitor { worker, .. } | ActionParams::Deliver { worker, .. } => Some(worker),
        ActionParams::Inspect { .. } => None,
    };
    if let Some(w) = worker {
        if !workers.contains(w) {
            out.push(Violation::new(&entity, format!("unknown worker `{w}`")));
        }
    }
    let need = match a.params {
        ActionParams::Inspect { .. } => Capability::Inspection,
        ActionParams::Monitor { .. } => Capability::Monitoring,
        ActionParams::Deliver { .. } => Capability::PhysicalInteraction,
    };
    let capable = fleet.iter().filter(|u| u.capabilities.contains(&need)).count();
    if capable == 0 {
        out.push(Violation::advisory(&entity, NO_CAPABLE_VEHICLE));
    } else if let ActionParams::Monitor { vehicles, .. } = a.params {
        if vehicles as usize > capable {
            out.push(Violation::advisory(&entity, "more vehicles requested than capable ones"));
        }
    }
}

/// Every broken rule of the scenario. Empty iff it is well-formed.
pub fn validate_scenario<S: Scalar>(s: &ScenarioConfig<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.schema_version != SCHEMA_VERSION {
        out.push(Violation::new("scenario", format!("schema_version == {SCHEMA_VERSION}")));
    }
    if !(s.dt.is_finite() && s.dt > S::zero()) {
        out.push(Violation::new("scenario", "dt > 0"));
    }
    if !(s.duration.is_finite() && s.duration > S::zero()) {
        out.push(Violation::new("scenario", "duration > 0"));
    }
    if s.fleet.is_empty() {
        out.push(Violation::new("scenario", "fleet non-empty"));
    }
    let mut ids = BTreeSet::new();
    for u in &s.fleet {
        if !ids.insert(&u.id) {
            out.push(Violation::new(format!("uav {}", u.id), "ids unique"));
        }
        out.extend(u.violations());
    }
    for (id, init) in &s.initial {
        let entity = format!("initial {id}");
        match s.spec(id) {
            None => out.push(Violation::new(&entity, "unknown uav")),
            Some(spec) => {
                if let Some(b) = init.battery {
                    if !(b >= S::zero() && b <= spec.battery_capacity) {
                        out.push(Violation::new(&entity, "battery in [0, capacity]"));
                    }
                }
                if init.position.is_some_and(|p| !p.is_finite()) {
                    out.push(Violation::new(&entity, "position must be finite"));
                }
            }
        }
    }
    let mut workers = BTreeSet::new();
    for w in &s.world.workers {
        if !workers.insert(&w.id) {
            out.push(Violation::new(format!("worker {}", w.id), "ids unique"));
        }
        if w.route.windows(2).any(|p| p[1].at < p[0].at) {
            out.push(Violation::new(format!("worker {}", w.id), "route times non-decreasing"));
        }
    }
    let mut actions = BTreeSet::new();
    for a in &s.actions {
        if !actions.insert(a.id.clone()) {
            out.push(Violation::new(format!("action {}", a.id), "ids unique"));
        }
        check_action(a, &workers, &s.fleet, a.arrival_time, s, &mut out);
    }
    for f in &s.faults {
        let entity = format!("fault at {}", f.at);
        if !(f.at.is_finite() && f.at >= S::zero() && f.at <= s.duration) {
            out.push(Violation::new(&entity, "time within duration"));
        }
        if let Some(u) = f.fault.uav() {
            if !ids.contains(u) {
                out.push(Violation::new(&entity, format!("unknown uav `{u}`")));
            }
        }
        match &f.fault {
            Fault::CommDown { duration, .. } if !(duration.is_finite() && *duration > S::zero()) => {
                out.push(Violation::new(&entity, "duration > 0"));
            }
            Fault::BatteryDrop { level, .. } if !(level.is_finite() && *level >= S::zero()) => {
                out.push(Violation::new(&entity, "level >= 0"));
            }
            Fault::ActionRequest { action } => {
                if !actions.insert(action.id.clone()) {
                    out.push(Violation::new(format!("action {}", action.id), "ids unique"));
                }
                check_action(action, &workers, &s.fleet, f.at, s, &mut out);
            }
            Fault::ParamChange { action, params } => {
                if !actions.contains(action) {
                    out.push(Violation::new(&entity, format!("unknown action `{action}`")));
                }
                out.extend(params.violations(&format!("action {action}")));
            }
            _ => {}
        }
    }
    out.extend(s.planner.violations());
    out.extend(s.agent.violations());
    if !(s.link.loss_probability >= S::zero() && s.link.loss_probability < S::one()) {
        out.push(Violation::new("link", "loss_probability in [0, 1)"));
    }
    out
}
