use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    ActionId, ActionRequest, Connectivity, Event, EventKind, Fleet, Plan, Span, Task, TaskId, TaskKind, TaskProgress,
    Unassignable, UnassignableReason, UavId, Violation, Work, WorkerId,
};
use crate::geometry::Point3;
use crate::planner::split::piece;
use crate::planner::{expand_action, plan_mission, ActionQueue, Committed, PlannerConfig, PlanningInput};
use crate::scalar::Scalar;

/// Controller failures after which a task is given up.
const MAX_FAILURES: u32 = 3;

/// Why a planning round was run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "snake_case")]
pub enum ReplanCause {
    Initial,
    TaskFinished { uav: UavId, task: TaskId },
    TaskFailed { uav: UavId, task: TaskId },
    NewAction { action: ActionId },
    ActionParamsModified { action: ActionId },
    /// Disconnected longer than the watchdog allows; the vehicle is excluded.
    WatchdogExpired { uav: UavId },
    /// An excluded vehicle is back.
    Reconnected { uav: UavId },
    BatteryFault { uav: UavId },
    /// A vehicle benched for its battery is charged again.
    Recovered { uav: UavId },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reaction<S> {
    NoAction,
    Replan(Plan<S>),
}

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error("unknown vehicle `{0}`")]
    UnknownUav(UavId),
    #[error("unknown action `{0}`")]
    UnknownAction(ActionId),
    #[error("unknown task `{0}`")]
    UnknownTask(TaskId),
    #[error("action `{0}` already exists with different parameters")]
    DuplicateId(ActionId),
    #[error("invalid request: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// Progress bookkeeping for one logical task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct TaskRecord<S> {
    pub task: Task<S>,
    pub done_waypoints: BTreeSet<usize>,
    /// Disjoint, sorted `[from, to)` intervals of monitoring already done.
    pub covered: Vec<(S, S)>,
    pub finished: bool,
    pub failures: u32,
}

/// Monitoring fragments shorter than this are not worth scheduling.
fn min_fragment<S: Scalar>() -> S {
    S::lit(1e-3)
}

fn add_interval<S: Scalar>(set: &mut Vec<(S, S)>, (a, b): (S, S)) {
    if b <= a {
        return;
    }
    set.push((a, b));
    set.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut merged: Vec<(S, S)> = Vec::with_capacity(set.len());
    for &(a, b) in set.iter() {
        match merged.last_mut() {
            Some(last) if a <= last.1 + S::tol() => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    *set = merged;
}

fn gaps<S: Scalar>(total: (S, S), taken: &[(S, S)]) -> Vec<(S, S)> {
    let mut out = Vec::new();
    let mut cur = total.0;
    for &(a, b) in taken {
        if a > cur {
            out.push((cur, a.min(total.1)));
        }
        cur = cur.max(b);
    }
    if cur < total.1 {
        out.push((cur, total.1));
    }
    out.retain(|(a, b)| *b - *a >= min_fragment());
    out
}

impl<S: Scalar> TaskRecord<S> {
    fn new(task: Task<S>) -> Self {
        Self { task, done_waypoints: BTreeSet::new(), covered: Vec::new(), finished: false, failures: 0 }
    }

    fn duration(&self) -> S {
        self.task.hold_duration()
    }

    pub fn is_complete(&self) -> bool {
        match self.task.kind {
            TaskKind::Inspect => self.done_waypoints.len() >= self.task.waypoints().len(),
            TaskKind::Monitor => gaps((S::zero(), self.duration()), &self.covered).is_empty(),
            _ => self.finished,
        }
    }

    pub fn abandoned(&self) -> bool {
        self.failures >= MAX_FAILURES
    }

    fn untouched(&self) -> bool {
        self.done_waypoints.is_empty() && self.covered.is_empty() && !self.finished
    }

    /// Credit the work of `p`: all of it, or what `progress` says was done.
    fn credit(&mut self, p: &Task<S>, progress: Option<&TaskProgress<S>>, whole: bool) {
        let span = p.origin.as_ref().map(|o| &o.span);
        match self.task.kind {
            TaskKind::Inspect => {
                let idx: Vec<usize> = match span {
                    Some(Span::Waypoints { indices }) => indices.clone(),
                    _ => (0..p.waypoints().len()).collect(),
                };
                let n = if whole {
                    idx.len()
                } else {
                    match progress {
                        Some(TaskProgress::Inspect { next_waypoint }) => (*next_waypoint).min(idx.len()),
                        _ => 0,
                    }
                };
                self.done_waypoints.extend(idx[..n].iter().copied());
            }
            TaskKind::Monitor => {
                let (from, to) = match span {
                    Some(Span::Coverage { from, to }) => (*from, *to),
                    _ => (S::zero(), p.hold_duration()),
                };
                let to = if whole {
                    to
                } else {
                    match progress {
                        Some(TaskProgress::Hold { elapsed }) => (from + *elapsed).min(to),
                        _ => from,
                    }
                };
                add_interval(&mut self.covered, (from, to));
            }
            _ => {
                if whole {
                    self.finished = true;
                }
            }
        }
    }

    /// Pieces still to schedule, given the pieces others are running.
    fn pending(&self, claimed: &[&Task<S>]) -> Vec<Task<S>> {
        if self.is_complete() || self.abandoned() {
            return Vec::new();
        }
        let mut out = match self.task.kind {
            TaskKind::Inspect => {
                let mut taken = self.done_waypoints.clone();
                for c in claimed {
                    if let Some(Span::Waypoints { indices }) = c.origin.as_ref().map(|o| &o.span) {
                        taken.extend(indices.iter().copied());
                    }
                }
                let left: Vec<usize> = (0..self.task.waypoints().len()).filter(|i| !taken.contains(i)).collect();
                if left.is_empty() {
                    Vec::new()
                } else if left.len() == self.task.waypoints().len() {
                    vec![self.task.clone()]
                } else {
                    let wps = left.iter().map(|&i| self.task.waypoints()[i]).collect();
                    vec![piece(&self.task, Span::Waypoints { indices: left }, Work::Waypoints(wps))]
                }
            }
            TaskKind::Monitor => {
                let mut taken = self.covered.clone();
                for c in claimed {
                    if let Some(Span::Coverage { from, to }) = c.origin.as_ref().map(|o| &o.span) {
                        add_interval(&mut taken, (*from, *to));
                    }
                }
                let total = (S::zero(), self.duration());
                gaps(total, &taken)
                    .into_iter()
                    .map(|(a, b)| {
                        if a <= S::zero() && b >= total.1 {
                            self.task.clone()
                        } else {
                            piece(&self.task, Span::Coverage { from: a, to: b }, Work::Duration(b - a))
                        }
                    })
                    .collect()
            }
            _ => {
                if claimed.is_empty() {
                    vec![self.task.clone()]
                } else {
                    Vec::new()
                }
            }
        };
        if !(self.untouched() && claimed.is_empty()) {
            for t in &mut out {
                t.sync_group = None;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Link<S> {
    Up,
    Down { since: S },
    Excluded,
}

#[derive(Clone, Debug, PartialEq)]
struct Running<S> {
    task: TaskId,
    progress: Option<TaskProgress<S>>,
}

/// The planner's event loop state.
#[derive(Clone, Debug)]
pub struct Planner<S> {
    cfg: PlannerConfig<S>,
    workers: BTreeMap<WorkerId, Point3<S>>,
    fleet: Fleet<S>,
    queue: ActionQueue<S>,
    records: BTreeMap<TaskId, TaskRecord<S>>,
    running: BTreeMap<UavId, Running<S>>,
    links: BTreeMap<UavId, Link<S>>,
    benched: BTreeSet<UavId>,
    issued: BTreeMap<TaskId, Task<S>>,
    plan: Plan<S>,
    now: S,
}

impl<S: Scalar> Planner<S> {
    pub fn new(cfg: PlannerConfig<S>, fleet: Fleet<S>, workers: BTreeMap<WorkerId, Point3<S>>) -> Self {
        let links = fleet.ids().map(|u| (u.clone(), Link::Up)).collect();
        Self {
            cfg,
            workers,
            fleet,
            queue: ActionQueue::new(),
            records: BTreeMap::new(),
            running: BTreeMap::new(),
            links,
            benched: BTreeSet::new(),
            issued: BTreeMap::new(),
            plan: Plan::default(),
            now: S::zero(),
        }
    }

    pub fn config(&self) -> &PlannerConfig<S> {
        &self.cfg
    }

    pub fn plan(&self) -> &Plan<S> {
        &self.plan
    }

    pub fn queue(&self) -> &ActionQueue<S> {
        &self.queue
    }

    pub fn fleet(&self) -> &Fleet<S> {
        &self.fleet
    }

    pub fn records(&self) -> &BTreeMap<TaskId, TaskRecord<S>> {
        &self.records
    }

    pub fn set_worker(&mut self, id: WorkerId, at: Point3<S>) {
        self.workers.insert(id, at);
    }

    /// Excluded by the watchdog or benched for its battery.
    pub fn is_available(&self, uav: &UavId) -> bool {
        self.links.get(uav).is_some_and(|l| *l != Link::Excluded) && !self.benched.contains(uav)
    }

    pub fn is_excluded(&self, uav: &UavId) -> bool {
        self.links.get(uav) == Some(&Link::Excluded)
    }

    /// Nothing left to do: no planned or running action work, and no vehicle
    /// out of service that could still take some.
    pub fn mission_over(&self) -> bool {
        let planned = self.plan.all_entries().any(|(_, e)| !e.task.kind.is_artificial());
        let running = self
            .running
            .values()
            .any(|r| self.issued.get(&r.task).is_some_and(|t| !t.kind.is_artificial()));
        let pending = self.records.values().any(|r| !r.is_complete() && !r.abandoned());
        let out_of_service = self.fleet.ids().any(|u| !self.is_available(u));
        !planned && !running && !(pending && out_of_service)
    }

    fn check_uav(&self, uav: &UavId) -> Result<(), PlannerError> {
        if self.fleet.contains(uav) {
            Ok(())
        } else {
            Err(PlannerError::UnknownUav(uav.clone()))
        }
    }

    /// Credit what `uav` was running and forget it.
    fn release(&mut self, uav: &UavId) {
        if let Some(r) = self.running.remove(uav) {
            if let Some(p) = self.issued.get(&r.task) {
                if let Some(rec) = self.records.get_mut(p.logical_id()) {
                    rec.credit(p, r.progress.as_ref(), false);
                }
            }
        }
    }

    fn add_action(&mut self, a: &ActionRequest<S>) -> Result<(), PlannerError> {
        let tasks = expand_action(a, &self.workers, &self.cfg).map_err(|v| PlannerError::Invalid(vec![v]))?;
        self.queue.insert(a.clone()).map_err(|d| PlannerError::DuplicateId(d.0))?;
        for t in tasks {
            self.records.insert(t.id.clone(), TaskRecord::new(t));
        }
        Ok(())
    }

    fn modify_action(&mut self, id: &ActionId, params: &crate::domain::ActionParams<S>) -> Result<(), PlannerError> {
        let old = self.queue.get(id).ok_or_else(|| PlannerError::UnknownAction(id.clone()))?.clone();
        if old.kind() != params.kind() {
            return Err(PlannerError::Invalid(vec![Violation::new(format!("action {id}"), "kind cannot change")]));
        }
        let updated = ActionRequest { params: params.clone(), ..old };
        let v = updated.violations();
        if !v.is_empty() {
            return Err(PlannerError::Invalid(v));
        }
        let tasks = expand_action(&updated, &self.workers, &self.cfg).map_err(|v| PlannerError::Invalid(vec![v]))?;
        // Running pieces of this action are credited and rescheduled.
        let affected: Vec<UavId> = self
            .running
            .iter()
            .filter(|(_, r)| self.issued.get(&r.task).is_some_and(|t| t.source_action.as_ref() == Some(id)))
            .map(|(u, _)| u.clone())
            .collect();
        for u in &affected {
            self.release(u);
        }
        let mut old_records: BTreeMap<TaskId, TaskRecord<S>> = BTreeMap::new();
        self.records.retain(|k, r| {
            if r.task.source_action.as_ref() == Some(id) {
                old_records.insert(k.clone(), r.clone());
                false
            } else {
                true
            }
        });
        for t in tasks {
            let mut rec = TaskRecord::new(t);
            if let Some(old) = old_records.remove(&rec.task.id) {
                let n = rec.task.waypoints().len();
                rec.done_waypoints = old.done_waypoints.into_iter().filter(|&i| i < n).collect();
                let d = rec.duration();
                for (a, b) in old.covered {
                    add_interval(&mut rec.covered, (a.min(d), b.min(d)));
                }
                rec.finished = old.finished;
                rec.failures = old.failures;
            }
            self.records.insert(rec.task.id.clone(), rec);
        }
        self.queue.replace(updated);
        Ok(())
    }

    /// Update planner state for one event; returns the replan cause, if any.
    pub fn apply(&mut self, e: &Event<S>) -> Result<Option<ReplanCause>, PlannerError> {
        if let Some(u) = e.uav() {
            self.check_uav(u)?;
        }
        self.now = self.now.max(e.timestamp);
        Ok(match &e.kind {
            EventKind::NewAction { action } => {
                let v = action.violations();
                if !v.is_empty() {
                    return Err(PlannerError::Invalid(v));
                }
                match self.queue.get(&action.id) {
                    Some(existing) if existing == action => {}
                    Some(_) => return Err(PlannerError::DuplicateId(action.id.clone())),
                    None => self.add_action(action)?,
                }
                Some(ReplanCause::NewAction { action: action.id.clone() })
            }
            EventKind::ActionParamsModified { action, params } => {
                self.modify_action(action, params)?;
                Some(ReplanCause::ActionParamsModified { action: action.clone() })
            }
            EventKind::TaskFinished { uav, task } => {
                let p = self.issued.get(task).cloned().ok_or_else(|| PlannerError::UnknownTask(task.clone()))?;
                if let Some(rec) = self.records.get_mut(p.logical_id()) {
                    rec.credit(&p, None, true);
                }
                if self.running.get(uav).is_some_and(|r| &r.task == task) {
                    self.running.remove(uav);
                }
                Some(ReplanCause::TaskFinished { uav: uav.clone(), task: task.clone() })
            }
            EventKind::TaskFailed { uav, task, reason } => {
                let assigned = self.plan.entries(uav).iter().any(|en| &en.task.id == task);
                let running = self.running.get(uav).is_some_and(|r| &r.task == task);
                if !assigned && !running {
                    tracing::debug!(%uav, %task, "stale failure report ignored");
                    return Ok(None);
                }
                if running {
                    self.release(uav);
                }
                if reason == FAILURE_CONTROLLER {
                    if let Some(rec) = self.issued.get(task).and_then(|p| self.records.get_mut(p.logical_id())) {
                        rec.failures += 1;
                    }
                }
                Some(ReplanCause::TaskFailed { uav: uav.clone(), task: task.clone() })
            }
            EventKind::Disconnected { uav } => {
                if self.links.get(uav) == Some(&Link::Up) {
                    self.links.insert(uav.clone(), Link::Down { since: e.timestamp });
                }
                if let Some(v) = self.fleet.get_mut(uav) {
                    v.state.connectivity = Connectivity::Disconnected { since: e.timestamp };
                }
                None
            }
            EventKind::Reconnected { uav } => {
                let was = self.links.insert(uav.clone(), Link::Up);
                if let Some(v) = self.fleet.get_mut(uav) {
                    v.state.connectivity = Connectivity::Connected;
                }
                (was == Some(Link::Excluded)).then(|| ReplanCause::Reconnected { uav: uav.clone() })
            }
            EventKind::BatteryFault { uav, level } => {
                self.release(uav);
                self.benched.insert(uav.clone());
                if let Some(v) = self.fleet.get_mut(uav) {
                    v.state.battery = *level;
                }
                Some(ReplanCause::BatteryFault { uav: uav.clone() })
            }
        })
    }

    /// Exclude vehicles disconnected for longer than the watchdog timeout.
    pub fn check_watchdogs(&mut self, now: S) -> Vec<ReplanCause> {
        self.now = self.now.max(now);
        let expired: Vec<UavId> = self
            .links
            .iter()
            .filter(|(_, l)| matches!(l, Link::Down { since } if now - *since >= self.cfg.watchdog_timeout - S::tol()))
            .map(|(u, _)| u.clone())
            .collect();
        expired
            .into_iter()
            .map(|u| {
                self.links.insert(u.clone(), Link::Excluded);
                self.release(&u);
                ReplanCause::WatchdogExpired { uav: u }
            })
            .collect()
    }

    /// Record a vehicle's reported state. Returns `Recovered` when a vehicle
    /// benched for its battery is full again.
    pub fn observe(
        &mut self,
        uav: &UavId,
        position: Point3<S>,
        battery: S,
        active: Option<&TaskId>,
        progress: Option<TaskProgress<S>>,
    ) -> Result<Option<ReplanCause>, PlannerError> {
        self.check_uav(uav)?;
        let v = self.fleet.get_mut(uav).expect("checked");
        v.state.position = position;
        v.state.battery = battery;
        let full = battery >= v.spec.battery_capacity - S::tol();
        if self.benched.contains(uav) || self.is_excluded(uav) {
            // Work of out-of-service vehicles was already credited.
            self.running.remove(uav);
        } else {
            match active.filter(|t| self.issued.contains_key(*t)) {
                Some(t) => {
                    self.running.insert(uav.clone(), Running { task: t.clone(), progress });
                }
                None => {
                    self.running.remove(uav);
                }
            }
        }
        if full && self.benched.remove(uav) {
            return Ok(Some(ReplanCause::Recovered { uav: uav.clone() }));
        }
        Ok(None)
    }

    /// Apply `e` and replan right away if it calls for it.
    pub fn handle_event(&mut self, e: &Event<S>) -> Result<Reaction<S>, PlannerError> {
        match self.apply(e)? {
            None => Ok(Reaction::NoAction),
            Some(cause) => Ok(Reaction::Replan(self.replan(e.timestamp, &[cause]).clone())),
        }
    }

    /// What the next planning round would start from.
    pub fn planning_input(&self, now: S) -> PlanningInput<S> {
        let mut fleet = Fleet::new();
        let mut committed = BTreeMap::new();
        for v in self.fleet.iter() {
            let id = &v.spec.id;
            if !self.is_available(id) {
                continue;
            }
            let floor = v.spec.reserve() + self.cfg.safety_margin;
            let home = v.spec.travel_rate * v.state.position.distance(v.spec.station);
            if v.state.battery - home < floor - S::tol() {
                // Too low to take anything on; its agent heads home on its own.
                continue;
            }
            fleet.insert(v.spec.clone(), v.state.clone()).expect("unique ids");
            if let Some(r) = self.running.get(id) {
                if let Some(t) = self.issued.get(&r.task) {
                    let live = match t.kind {
                        TaskKind::Recharge => true,
                        TaskKind::Wait => false,
                        _ => self.records.get(t.logical_id()).is_some_and(|rec| !rec.is_complete() && !rec.abandoned()),
                    };
                    if live {
                        committed.insert(id.clone(), Committed { task: t.clone(), progress: r.progress.clone() });
                    }
                }
            }
        }
        let mut tasks = Vec::new();
        for (id, rec) in &self.records {
            let claimed: Vec<&Task<S>> =
                committed.values().map(|c| &c.task).filter(|t| t.logical_id() == id).collect();
            tasks.extend(rec.pending(&claimed));
        }
        PlanningInput { now, fleet, committed, tasks }
    }

    /// Run a planning round over the remaining work and available vehicles.
    pub fn replan(&mut self, now: S, causes: &[ReplanCause]) -> &Plan<S> {
        self.now = self.now.max(now);
        tracing::debug!(?causes, "replanning");
        let input = self.planning_input(self.now);
        let mut plan = plan_mission(&input, &self.cfg).plan;
        plan.version = self.plan.version + 1;
        for rec in self.records.values().filter(|r| r.abandoned() && !r.is_complete()) {
            plan.unassignable.push(Unassignable {
                task: rec.task.id.clone(),
                source_action: rec.task.source_action.clone(),
                reason: UnassignableReason::RepeatedFailure,
            });
        }
        for (_, e) in plan.all_entries() {
            self.issued.entry(e.task.id.clone()).or_insert_with(|| e.task.clone());
        }
        for v in self.fleet.ids().cloned().collect::<Vec<_>>() {
            let queue: Vec<TaskId> = plan.entries(&v).iter().map(|e| e.task.id.clone()).collect();
            let state = &mut self.fleet.get_mut(&v).expect("own id").state;
            state.current_task = queue.first().filter(|t| self.running.get(&v).is_some_and(|r| &r.task == *t)).cloned();
            state.queue = queue;
        }
        self.plan = plan;
        &self.plan
    }
}

/// `TaskFailed` reason used by agents for controller failures.
pub const FAILURE_CONTROLLER: &str = "controller";
