//! The driver loop: one fixed round of injections, delivery, planner, agents
//! and physics per step.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::agent::Agent;
use crate::domain::{ActionId, ActionParams, ActionRequest, Event, EventKind, Fleet, UavId, UavState};
use crate::planner::Planner;
use crate::scalar::Scalar;
use crate::scenario::{Fault, ScenarioConfig};

use super::bus::Bus;
use super::log::{Command, EndOutcome, LogEntry, Record};
use super::node::PlannerNode;
use super::snapshot::{Snapshot, TaskView, VehicleView};
use super::world::{World, WorldEvent};

/// Why a command was refused. `code` is stable and machine-readable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{code}: {detail}")]
pub struct CommandError {
    pub code: &'static str,
    pub detail: String,
}

impl CommandError {
    fn new(code: &'static str, detail: impl Into<String>) -> Self {
        Self { code, detail: detail.into() }
    }
}

#[derive(Clone, Debug)]
struct Scripted<S> {
    at: S,
    fault: Fault<S>,
}

pub struct Mission<S> {
    scenario: ScenarioConfig<S>,
    world: World<S>,
    bus: Bus<S>,
    node: PlannerNode<S>,
    agents: BTreeMap<UavId, Agent<S>>,
    script: Vec<Scripted<S>>,
    next_script: usize,
    commands: VecDeque<(Option<String>, Command<S>)>,
    log: Vec<LogEntry<S>>,
    ended: Option<EndOutcome>,
    feedback_every: u64,
}

impl<S: Scalar> Mission<S> {
    /// Set up a mission from a validated scenario.
    pub fn new(scenario: ScenarioConfig<S>) -> Self {
        let world = World::new(&scenario);
        let mut fleet = Fleet::new();
        for spec in &scenario.fleet {
            let b = world.body(&spec.id).expect("body per spec");
            let state = UavState { position: b.position, battery: b.battery, ..UavState::parked(spec) };
            fleet.insert(spec.clone(), state).expect("unique ids");
        }
        let planner = Planner::new(scenario.planner.clone(), fleet, world.workers_at(S::zero()));
        let mut agent_cfg = scenario.agent.clone();
        agent_cfg.tick_period = scenario.dt;
        let agents = scenario
            .fleet
            .iter()
            .map(|s| (s.id.clone(), Agent::new(s.clone(), agent_cfg.clone(), scenario.planner.watchdog_timeout)))
            .collect();
        let mut script: Vec<Scripted<S>> = scenario
            .actions
            .iter()
            .map(|a| Scripted { at: a.arrival_time, fault: Fault::ActionRequest { action: a.clone() } })
            .chain(scenario.faults.iter().map(|f| Scripted { at: f.at, fault: f.fault.clone() }))
            .collect();
        script.sort_by(|a, b| a.at.partial_cmp(&b.at).unwrap_or(std::cmp::Ordering::Equal));
        let feedback_every = (S::one() / scenario.dt).round().to_u64().unwrap_or(1).max(1);
        let mut m = Self {
            bus: Bus::new(scenario.seed, scenario.link.loss_probability),
            node: PlannerNode::new(planner, agent_cfg.resend_after),
            world,
            agents,
            script,
            next_script: 0,
            commands: VecDeque::new(),
            log: Vec::new(),
            ended: None,
            feedback_every,
            scenario,
        };
        let header = Record::Header { scenario: m.scenario.clone() };
        m.push(header);
        m
    }

    pub fn scenario(&self) -> &ScenarioConfig<S> {
        &self.scenario
    }

    pub fn world(&self) -> &World<S> {
        &self.world
    }

    pub fn planner(&self) -> &Planner<S> {
        self.node.planner()
    }

    pub fn agent(&self, id: &UavId) -> Option<&Agent<S>> {
        self.agents.get(id)
    }

    pub fn log(&self) -> &[LogEntry<S>] {
        &self.log
    }

    pub fn time(&self) -> S {
        self.world.time()
    }

    pub fn ended(&self) -> Option<EndOutcome> {
        self.ended
    }

    fn push(&mut self, record: Record<S>) {
        let entry = LogEntry { index: self.log.len() as u64, step: self.world.step_index(), time: self.world.time(), record };
        self.log.push(entry);
    }

    fn known_action(&self, id: &ActionId) -> Option<ActionRequest<S>> {
        let queued = self.commands.iter().rev().find_map(|(_, c)| match c {
            Command::SubmitAction { action } | Command::InjectFault { fault: Fault::ActionRequest { action } }
                if &action.id == id =>
            {
                Some(action.clone())
            }
            _ => None,
        });
        // Script entries due now are injected ahead of queued commands.
        let now = self.world.time();
        let due = || {
            self.script[self.next_script..].iter().take_while(|s| s.at <= now + S::tol()).find_map(|s| match &s.fault {
                Fault::ActionRequest { action } if &action.id == id => Some(action.clone()),
                _ => None,
            })
        };
        queued.or_else(|| self.planner().queue().get(id).cloned()).or_else(due)
    }

    fn check_action(&self, a: &ActionRequest<S>) -> Result<(), CommandError> {
        let v = a.violations();
        if !v.is_empty() {
            return Err(CommandError::new("invalid_action", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")));
        }
        if let ActionParams::Monitor { worker, .. } | ActionParams::Deliver { worker, .. } = &a.params {
            if !self.scenario.world.workers.iter().any(|w| &w.id == worker) {
                return Err(CommandError::new("unknown_worker", format!("no worker `{worker}`")));
            }
        }
        match self.known_action(&a.id) {
            Some(existing) if &existing != a => Err(CommandError::new("duplicate_action", format!("action `{}` exists", a.id))),
            _ => Ok(()),
        }
    }

    fn check_modify(&self, id: &ActionId, params: &ActionParams<S>) -> Result<(), CommandError> {
        let existing = self.known_action(id).ok_or_else(|| CommandError::new("unknown_action", format!("no action `{id}`")))?;
        if existing.kind() != params.kind() {
            return Err(CommandError::new("kind_mismatch", "an action keeps its kind"));
        }
        let v = params.violations(&format!("action {id}"));
        if !v.is_empty() {
            return Err(CommandError::new("invalid_params", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")));
        }
        Ok(())
    }

    fn check_fault(&self, f: &Fault<S>) -> Result<(), CommandError> {
        if let Some(u) = f.uav() {
            if self.world.body(u).is_none() {
                return Err(CommandError::new("unknown_uav", format!("no vehicle `{u}`")));
            }
        }
        match f {
            Fault::CommDown { duration, .. } if !(duration.is_finite() && *duration > S::zero()) => {
                Err(CommandError::new("invalid_fault", "duration > 0"))
            }
            Fault::BatteryDrop { level, .. } if !(level.is_finite() && *level >= S::zero()) => {
                Err(CommandError::new("invalid_fault", "level >= 0"))
            }
            Fault::ActionRequest { action } => self.check_action(action),
            Fault::ParamChange { action, params } => self.check_modify(action, params),
            _ => Ok(()),
        }
    }

    /// Queue a command for the next step boundary. Returns the step it
    /// applies at.
    pub fn submit(&mut self, client: Option<String>, command: Command<S>) -> Result<u64, CommandError> {
        if self.ended.is_some() {
            return Err(CommandError::new("mission_ended", "the mission is over"));
        }
        let now = self.world.time();
        let command = match command {
            Command::SubmitAction { mut action } => {
                action.arrival_time = action.arrival_time.max(now);
                self.check_action(&action)?;
                Command::SubmitAction { action }
            }
            Command::ModifyAction { action, params } => {
                self.check_modify(&action, &params)?;
                Command::ModifyAction { action, params }
            }
            Command::InjectFault { fault } => {
                let fault = match fault {
                    Fault::ActionRequest { mut action } => {
                        action.arrival_time = action.arrival_time.max(now);
                        Fault::ActionRequest { action }
                    }
                    f => f,
                };
                self.check_fault(&fault)?;
                Command::InjectFault { fault }
            }
        };
        self.commands.push_back((client, command));
        Ok(self.world.step_index())
    }

    fn apply_fault(&mut self, f: Fault<S>) {
        let now = self.world.time();
        match f {
            Fault::CommDown { uav, duration } => {
                if self.world.link_down(&uav, now + duration) {
                    self.push(Record::Link { uav: uav.clone(), up: false });
                    self.node.post(Event::new(now, EventKind::Disconnected { uav }));
                }
            }
            Fault::BatteryDrop { uav, level } => {
                if let Some(b) = self.world.body_mut(&uav) {
                    b.battery = level.max(S::zero()).min(b.spec.battery_capacity);
                }
            }
            Fault::ControllerFailure { uav } => {
                if let Some(b) = self.world.body_mut(&uav) {
                    b.controller_fault = true;
                }
            }
            Fault::ActionRequest { action } => self.node.post(Event::new(now, EventKind::NewAction { action })),
            Fault::ParamChange { action, params } => {
                self.node.post(Event::new(now, EventKind::ActionParamsModified { action, params }))
            }
        }
    }

    fn inject(&mut self) {
        let now = self.world.time();
        for uav in self.world.restore_links() {
            self.push(Record::Link { uav: uav.clone(), up: true });
            self.node.post(Event::new(now, EventKind::Reconnected { uav }));
        }
        while let Some(s) = self.script.get(self.next_script).filter(|s| s.at <= now + S::tol()).cloned() {
            self.next_script += 1;
            self.push(Record::Injected { fault: s.fault.clone() });
            self.apply_fault(s.fault);
        }
        while let Some((client, c)) = self.commands.pop_front() {
            self.push(Record::Command { client, command: c.clone() });
            match c {
                Command::SubmitAction { action } => self.apply_fault(Fault::ActionRequest { action }),
                Command::ModifyAction { action, params } => self.apply_fault(Fault::ParamChange { action, params }),
                Command::InjectFault { fault } => self.apply_fault(fault),
            }
        }
    }

    fn is_complete(&self) -> bool {
        self.next_script == self.script.len()
            && self.commands.is_empty()
            && self.planner().mission_over()
            && self.world.links().values().all(|l| l.is_up())
            && self.world.bodies().values().all(|b| b.grounded || (b.landed && b.position.distance(b.spec.station) <= S::tol()))
            && self.agents.values().all(|a| a.ctx.plan_version == self.planner().plan().version)
    }

    /// Run one step. Returns the entries it added to the log.
    pub fn step(&mut self) -> &[LogEntry<S>] {
        let start = self.log.len();
        if self.ended.is_some() {
            return &self.log[start..];
        }
        let k = self.world.step_index();
        let now = self.world.time();
        self.inject();

        let world = &self.world;
        let delivery = self.bus.deliver(k, |u| world.link(u).is_up());
        for m in &delivery.to_agents {
            if let Some(a) = self.agents.get_mut(m.uav()) {
                a.receive(m);
            }
        }

        for (w, p) in self.world.workers_at(now) {
            self.node.set_worker(w, p);
        }
        let out = self.node.step(now, delivery.to_planner);
        for r in out.records {
            self.push(r);
        }
        for m in out.messages {
            self.bus.send(k, m);
        }

        let ids: Vec<UavId> = self.agents.keys().cloned().collect();
        for id in ids {
            if self.world.body(&id).is_none_or(|b| b.grounded) {
                continue;
            }
            let sensors = self.world.sensors(&id).expect("body per agent");
            let o = self.agents.get_mut(&id).expect("agent").tick(sensors);
            self.world.command(&id, o.control);
            if let Some(cause) = o.emergency {
                self.push(Record::Emergency { uav: id.clone(), cause });
            }
            if k.is_multiple_of(self.feedback_every) {
                self.push(Record::Feedback { feedback: o.feedback });
            }
            for m in o.messages {
                self.bus.send(k, m);
            }
        }

        for ev in self.world.advance() {
            if let WorldEvent::Grounded { uav, .. } = &ev {
                self.node.post(Event::new(now, EventKind::BatteryFault { uav: uav.clone(), level: S::zero() }));
            }
            self.push(Record::World { event: ev });
        }

        if self.is_complete() {
            self.finish(EndOutcome::Completed);
        } else if self.world.time() >= self.scenario.duration - S::tol() {
            self.finish(EndOutcome::TimedOut);
        }
        &self.log[start..]
    }

    /// Close the log with an end record.
    pub fn finish(&mut self, outcome: EndOutcome) {
        if self.ended.is_some() {
            return;
        }
        self.ended = Some(outcome);
        let mut snapshot = self.snapshot();
        // Counts the end record itself.
        snapshot.log_len += 1;
        self.push(Record::End { outcome, snapshot });
    }

    /// Step until the mission ends.
    pub fn run(&mut self) -> EndOutcome {
        while self.ended.is_none() {
            self.step();
        }
        self.ended.expect("ended")
    }

    /// Step while simulated time is below `t` and the mission runs.
    pub fn run_until(&mut self, t: S) {
        while self.ended.is_none() && self.world.time() < t - S::tol() {
            self.step();
        }
    }

    pub fn snapshot(&self) -> Snapshot<S> {
        let planner = self.planner();
        let vehicles = self
            .world
            .bodies()
            .iter()
            .map(|(id, b)| {
                let a = self.agents.get(id);
                VehicleView {
                    id: id.clone(),
                    position: b.position,
                    battery: b.battery,
                    battery_capacity: b.spec.battery_capacity,
                    reserve: b.spec.reserve(),
                    station: b.spec.station,
                    landed: b.landed,
                    grounded: b.grounded,
                    carried_tool: b.carried_tool.clone(),
                    link: self.world.link(id),
                    bt_status: a.and_then(|a| a.last_status()),
                    active_task: a.and_then(|a| a.last_active().cloned()),
                    queue: a.map(|a| a.ctx.queue.iter().map(|t| t.id.clone()).collect()).unwrap_or_default(),
                    plan_version: a.map_or(0, |a| a.ctx.plan_version),
                    available: planner.is_available(id),
                }
            })
            .collect();
        let tasks = planner
            .records()
            .values()
            .map(|r| TaskView {
                id: r.task.id.clone(),
                action: r.task.source_action.clone(),
                kind: r.task.kind,
                complete: r.is_complete(),
                failures: r.failures,
            })
            .collect();
        Snapshot {
            step: self.world.step_index(),
            time: self.world.time(),
            mission_over: planner.mission_over(),
            vehicles,
            workers: self.world.workers_at(self.world.time()),
            towers: self.world.towers().to_vec(),
            plan: planner.plan().clone(),
            actions: planner.queue().iter().cloned().collect(),
            tasks,
            log_len: self.log.len() as u64,
        }
    }

    /// Messages sent and not yet delivered.
    pub fn in_flight(&self) -> usize {
        self.bus.in_flight()
    }
}
