//! Per-vehicle behavior manager: the Main Tree ticked against the vehicle's
//! state, fed by task lists and reporting back through Feedback.

mod actions;
mod context;
pub mod trees;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use skycrew_bt::{BtNode, NodeStatus};

pub use actions::CONTROLLER;
pub use context::{AgentConfig, AgentContext, Control, Motion, Sensors, ToolOp};
pub use trees::main_tree;

use crate::domain::{TaskId, UavSpec};
use crate::protocol::{Feedback, Message, ReportBody, TaskList};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmergencyCause {
    CommLoss,
    BatteryFault,
}

impl EmergencyCause {
    pub fn reason(self) -> &'static str {
        match self {
            EmergencyCause::CommLoss => "comm_loss",
            EmergencyCause::BatteryFault => "battery_fault",
        }
    }
}

/// Replace the queue with a newer task list. Returns whether the head task
/// changed, in which case whatever runs must be halted; `None` for a stale list.
pub fn on_task_list<S: Scalar>(ctx: &mut AgentContext<S>, list: &TaskList<S>) -> Option<bool> {
    if list.version <= ctx.plan_version {
        tracing::debug!(uav = %ctx.id(), version = list.version, held = ctx.plan_version, "stale task list ignored");
        return None;
    }
    // Tasks done here but not yet acknowledged may still appear in lists
    // the planner built before hearing about them.
    let done: BTreeSet<&TaskId> = ctx
        .unacked()
        .filter_map(|r| match &r.body {
            ReportBody::TaskOutcome { task, success: true, .. } => Some(task),
            _ => None,
        })
        .collect();
    let old_head = ctx.head().map(|t| t.id.clone());
    let queue: Vec<_> = list.entries.iter().map(|e| e.task.clone()).filter(|t| !done.contains(&t.id)).collect();
    ctx.queue = queue;
    ctx.plan_version = list.version;
    ctx.mission_over = list.mission_over;
    let changed = ctx.head().map(|t| &t.id) != old_head.as_ref();
    if changed {
        ctx.progress = None;
        ctx.handling = S::zero();
    }
    Some(changed)
}

/// Empty the queue after a local fault. The interrupted task, if one was
/// active, is reported failed; a battery fault is reported as well.
pub fn emergency_protocol<S: Scalar>(ctx: &mut AgentContext<S>, cause: EmergencyCause, active: Option<&TaskId>) {
    if let Some(t) = active.filter(|t| ctx.queue.iter().any(|q| &q.id == *t)) {
        ctx.report(ReportBody::TaskOutcome { task: t.clone(), success: false, reason: Some(cause.reason().into()) });
    }
    if cause == EmergencyCause::BatteryFault {
        ctx.report(ReportBody::BatteryFault { level: ctx.sensors.battery });
    }
    ctx.queue.clear();
    ctx.progress = None;
    ctx.handling = S::zero();
}

/// One tick of the Main Tree. Returns the root status; the head task is
/// reported active if a task action ran.
pub fn tick_agent<S: Scalar>(tree: &mut BtNode<AgentContext<S>>, ctx: &mut AgentContext<S>) -> (NodeStatus, Option<TaskId>) {
    ctx.control = Control::default();
    ctx.working = false;
    let status = tree.tick(ctx);
    let active = if ctx.working { ctx.head().map(|t| t.id.clone()) } else { None };
    (status, active)
}

/// An agent with its tree, fault detection and report outbox.
pub struct Agent<S> {
    pub ctx: AgentContext<S>,
    tree: BtNode<AgentContext<S>>,
    comm_timeout: S,
    link_down_since: Option<S>,
    comm_emergency: bool,
    last_battery: Option<S>,
    last_active: Option<TaskId>,
    last_status: Option<NodeStatus>,
}

/// What one agent tick produces.
#[derive(Clone, Debug)]
pub struct TickOutput<S> {
    pub control: Control<S>,
    pub feedback: Feedback<S>,
    pub messages: Vec<Message<S>>,
    pub emergency: Option<EmergencyCause>,
    pub halted: Vec<String>,
}

impl<S: Scalar> Agent<S> {
    pub fn new(spec: UavSpec<S>, cfg: AgentConfig<S>, watchdog_timeout: S) -> Self {
        let comm_timeout = cfg.comm_loss_timeout.unwrap_or(watchdog_timeout);
        Self {
            ctx: AgentContext::new(spec, cfg),
            tree: main_tree(),
            comm_timeout,
            link_down_since: None,
            comm_emergency: false,
            last_battery: None,
            last_active: None,
            last_status: None,
        }
    }

    pub fn tree(&self) -> &BtNode<AgentContext<S>> {
        &self.tree
    }

    pub fn last_status(&self) -> Option<NodeStatus> {
        self.last_status
    }

    pub fn last_active(&self) -> Option<&TaskId> {
        self.last_active.as_ref()
    }

    /// Handle a message from the planner.
    pub fn receive(&mut self, msg: &Message<S>) {
        match msg {
            Message::TaskList(list) => {
                if on_task_list(&mut self.ctx, list) == Some(true) {
                    self.tree.halt(&mut self.ctx);
                }
            }
            Message::Ack { seq, .. } => self.ctx.outbox.retain(|p| p.report.seq > *seq),
            _ => {}
        }
    }

    fn max_drop_per_tick(&self) -> S {
        let s = &self.ctx.spec;
        let dt = self.ctx.cfg.tick_period;
        (s.travel_rate * s.speed + s.hover_rate) * dt
    }

    fn detect_faults(&mut self, sensors: &crate::agent::Sensors<S>) -> Option<EmergencyCause> {
        let mut cause = None;
        if let Some(prev) = self.last_battery {
            let limit = self.ctx.cfg.fault_factor * self.max_drop_per_tick() + S::tol();
            if prev - sensors.battery > limit {
                cause = Some(EmergencyCause::BatteryFault);
            }
        }
        self.last_battery = Some(sensors.battery);
        if sensors.link_up {
            self.link_down_since = None;
            self.comm_emergency = false;
        } else {
            let since = *self.link_down_since.get_or_insert(sensors.time);
            if !self.comm_emergency && sensors.time - since >= self.comm_timeout - S::tol() {
                self.comm_emergency = true;
                cause = cause.or(Some(EmergencyCause::CommLoss));
            }
        }
        cause
    }

    /// Read the sensors, run the emergency protocol if needed, tick the tree
    /// and collect what goes out.
    pub fn tick(&mut self, sensors: Sensors<S>) -> TickOutput<S> {
        let emergency = self.detect_faults(&sensors);
        self.ctx.sensors = sensors;
        if let Some(cause) = emergency {
            let active = self.last_active.clone();
            emergency_protocol(&mut self.ctx, cause, active.as_ref());
            self.tree.halt(&mut self.ctx);
        }
        let (status, active) = tick_agent(&mut self.tree, &mut self.ctx);
        self.last_active = active.clone();
        self.last_status = Some(status);
        let ctx = &mut self.ctx;
        let feedback = Feedback {
            uav: ctx.spec.id.clone(),
            bt_status: status,
            battery: ctx.sensors.battery,
            active_task: active,
            timestamp: ctx.sensors.time,
            position: ctx.sensors.position,
            plan_version: ctx.plan_version,
            queued: ctx.queue.len(),
            progress: if self.last_active.is_some() { ctx.progress.clone() } else { None },
            carried_tool: ctx.sensors.carried_tool.clone(),
        };
        let now = ctx.sensors.time;
        let resend = ctx.cfg.resend_after;
        let mut messages = vec![Message::Feedback(feedback.clone())];
        if ctx.sensors.link_up {
            for p in ctx.outbox.iter_mut() {
                if p.last_sent.is_none_or(|t| now - t >= resend - S::tol()) {
                    p.last_sent = Some(now);
                    messages.push(Message::Report(p.report.clone()));
                }
            }
        }
        TickOutput { control: ctx.control.clone(), feedback, messages, emergency, halted: std::mem::take(&mut ctx.halted) }
    }
}

#[cfg(test)]
mod tests;
