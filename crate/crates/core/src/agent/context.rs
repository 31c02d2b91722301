use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Task, TaskKind, TaskProgress, ToolId, UavId, UavSpec, Violation, WorkerId};
use crate::geometry::Point3;
use crate::planner::{leg, return_energy};
use crate::protocol::{Report, ReportBody};
use crate::scalar::Scalar;

fn default_tick<S: Scalar>() -> S {
    S::lit(0.1)
}

fn default_epsilon<S: Scalar>() -> S {
    S::one()
}

fn default_full<S: Scalar>() -> S {
    S::lit(0.999)
}

fn default_resend<S: Scalar>() -> S {
    S::one()
}

fn default_fault_factor<S: Scalar>() -> S {
    S::lit(3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct AgentConfig<S> {
    #[serde(default = "default_tick")]
    pub tick_period: S,
    /// Distance under which the vehicle counts as near a target.
    #[serde(default = "default_epsilon")]
    pub near_epsilon: S,
    /// Fraction of capacity at which the battery counts as full.
    #[serde(default = "default_full")]
    pub battery_full_fraction: S,
    /// How long the link may stay down before the emergency protocol runs.
    /// Defaults to the planner's watchdog timeout.
    #[serde(default)]
    pub comm_loss_timeout: Option<S>,
    /// Seconds before an unacknowledged report is sent again.
    #[serde(default = "default_resend")]
    pub resend_after: S,
    /// A battery drop larger than this many ticks of full consumption is a fault.
    #[serde(default = "default_fault_factor")]
    pub fault_factor: S,
}

impl<S: Scalar> Default for AgentConfig<S> {
    fn default() -> Self {
        Self {
            tick_period: default_tick(),
            near_epsilon: default_epsilon(),
            battery_full_fraction: default_full(),
            comm_loss_timeout: None,
            resend_after: default_resend(),
            fault_factor: default_fault_factor(),
        }
    }
}

impl<S: Scalar> AgentConfig<S> {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let pos = |v: S| v.is_finite() && v > S::zero();
        if !pos(self.tick_period) {
            out.push(Violation::new("agent", "tick_period > 0"));
        }
        if !pos(self.near_epsilon) {
            out.push(Violation::new("agent", "near_epsilon > 0"));
        }
        if !(pos(self.battery_full_fraction) && self.battery_full_fraction <= S::one()) {
            out.push(Violation::new("agent", "battery_full_fraction in (0, 1]"));
        }
        if self.comm_loss_timeout.is_some_and(|t| !pos(t)) {
            out.push(Violation::new("agent", "comm_loss_timeout > 0"));
        }
        if !pos(self.resend_after) {
            out.push(Violation::new("agent", "resend_after > 0"));
        }
        if !pos(self.fault_factor) {
            out.push(Violation::new("agent", "fault_factor > 0"));
        }
        out
    }
}

/// What the vehicle knows about itself and its surroundings at a tick.
#[derive(Clone, Debug, PartialEq)]
pub struct Sensors<S> {
    pub time: S,
    pub position: Point3<S>,
    pub battery: S,
    pub landed: bool,
    pub carried_tool: Option<ToolId>,
    pub link_up: bool,
    /// A pending controller failure, consumed by the next task command.
    pub controller_fault: bool,
    pub workers: BTreeMap<WorkerId, Point3<S>>,
}

impl<S: Scalar> Sensors<S> {
    pub fn parked(spec: &UavSpec<S>) -> Self {
        Self {
            time: S::zero(),
            position: spec.station,
            battery: spec.battery_capacity,
            landed: true,
            carried_tool: None,
            link_up: true,
            controller_fault: false,
            workers: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "motion", content = "target", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum Motion<S> {
    /// Stay put: hover when airborne, stay down when landed.
    #[default]
    Hold,
    FlyTo(Point3<S>),
    /// Land where the vehicle is; only possible on its station.
    Land,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "tool", rename_all = "snake_case")]
pub enum ToolOp {
    Pick(ToolId),
    /// Hand the tool to the worker.
    Release,
    /// Put the tool back on the station.
    Drop,
}

/// Commands for the low-level controllers, rebuilt every tick.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Control<S> {
    pub motion: Motion<S>,
    pub recharge: bool,
    pub tool: Option<ToolOp>,
    pub fault_consumed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Pending<S> {
    pub report: Report<S>,
    pub last_sent: Option<S>,
}

/// Blackboard of one agent's tree.
#[derive(Clone, Debug)]
pub struct AgentContext<S> {
    pub spec: UavSpec<S>,
    pub cfg: AgentConfig<S>,
    pub plan_version: u64,
    pub queue: Vec<Task<S>>,
    pub mission_over: bool,
    /// Progress on the head of the queue.
    pub progress: Option<TaskProgress<S>>,
    /// Handling time spent at the worker on a delivery.
    pub handling: S,
    pub sensors: Sensors<S>,
    pub control: Control<S>,
    /// Set by task actions when they run; the head task is active then.
    pub working: bool,
    /// Names of actions halted since the last tick.
    pub halted: Vec<String>,
    pub(crate) outbox: Vec<Pending<S>>,
    pub(crate) next_seq: u64,
}

impl<S: Scalar> AgentContext<S> {
    pub fn new(spec: UavSpec<S>, cfg: AgentConfig<S>) -> Self {
        let sensors = Sensors::parked(&spec);
        Self {
            spec,
            cfg,
            plan_version: 0,
            queue: Vec::new(),
            mission_over: false,
            progress: None,
            handling: S::zero(),
            sensors,
            control: Control::default(),
            working: false,
            halted: Vec::new(),
            outbox: Vec::new(),
            next_seq: 1,
        }
    }

    pub fn id(&self) -> &UavId {
        &self.spec.id
    }

    pub fn head(&self) -> Option<&Task<S>> {
        self.queue.first()
    }

    pub fn head_kind(&self) -> Option<TaskKind> {
        self.head().map(|t| t.kind)
    }

    pub fn is_near(&self, p: Point3<S>) -> bool {
        self.sensors.position.distance(p) < self.cfg.near_epsilon
    }

    pub fn at(&self, p: Point3<S>) -> bool {
        self.sensors.position.distance(p) <= S::lit(1e-6)
    }

    /// The reserve. The planner's safety margin stays on top of it to absorb
    /// tick-level deviations from the plan.
    pub fn floor(&self) -> S {
        self.spec.reserve()
    }

    /// Where the vehicle must be to work on the head task with the worker.
    pub fn human_target(&self) -> Option<Point3<S>> {
        let t = self.head()?;
        let target = t.target.as_ref()?;
        match target.worker.as_ref().and_then(|w| self.sensors.workers.get(w)) {
            Some(w) => Some(*w + target.offset),
            None => Some(t.start_location),
        }
    }

    /// Next waypoint of the head inspection.
    pub fn next_waypoint(&self) -> Option<Point3<S>> {
        let t = self.head()?;
        let i = match self.progress {
            Some(TaskProgress::Inspect { next_waypoint }) => next_waypoint,
            _ => 0,
        };
        t.waypoints().get(i).copied()
    }

    /// Energy left after finishing the head task and flying home, against the floor.
    pub fn battery_enough(&self) -> bool {
        let Some(t) = self.head() else { return true };
        let l = leg(&self.spec, self.sensors.position, t, self.progress.as_ref());
        let need = if t.kind == TaskKind::Recharge {
            l.energy(&self.spec)
        } else {
            l.energy(&self.spec) + return_energy(&self.spec, l.end)
        };
        self.sensors.battery - need >= self.floor() - S::tol() * self.spec.battery_capacity.max(S::one())
    }

    pub fn battery_full(&self) -> bool {
        self.sensors.battery >= self.cfg.battery_full_fraction * self.spec.battery_capacity
    }

    /// Queue a report for the planner.
    pub fn report(&mut self, body: ReportBody<S>) {
        let report = Report { uav: self.spec.id.clone(), seq: self.next_seq, timestamp: self.sensors.time, body };
        self.next_seq += 1;
        self.outbox.push(Pending { report, last_sent: None });
    }

    /// Take a pending controller failure, if any.
    pub fn take_fault(&mut self) -> bool {
        if self.sensors.controller_fault && !self.control.fault_consumed {
            self.control.fault_consumed = true;
            return true;
        }
        false
    }

    /// Pop the head task and reset its progress.
    pub fn finish_head(&mut self) -> Option<Task<S>> {
        self.progress = None;
        self.handling = S::zero();
        (!self.queue.is_empty()).then(|| self.queue.remove(0))
    }

    pub fn unacked(&self) -> impl Iterator<Item = &Report<S>> {
        self.outbox.iter().map(|p| &p.report)
    }
}
