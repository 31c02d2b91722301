//! The planner as a bus participant: turns reports into events, acknowledges
//! them, runs the watchdog and sends task lists after every replan.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{Event, EventKind, UavId, WorkerId};
use crate::geometry::Point3;
use crate::planner::{Planner, PlannerError, ReplanCause};
use crate::protocol::{Feedback, Message, Report, ReportBody, TaskList};
use crate::scalar::Scalar;

use super::log::Record;

#[derive(Clone, Debug, Default)]
struct Inbound {
    /// Every seq received, for dedup.
    seen: BTreeSet<u64>,
    /// All seqs up to this one were received.
    contiguous: u64,
}

impl Inbound {
    /// Record `seq`; returns whether it is new.
    fn receive(&mut self, seq: u64) -> bool {
        if seq <= self.contiguous || !self.seen.insert(seq) {
            return false;
        }
        while self.seen.remove(&(self.contiguous + 1)) {
            self.contiguous += 1;
        }
        true
    }
}

/// Output of one planner step.
#[derive(Clone, Debug, Default)]
pub struct NodeOutput<S> {
    pub messages: Vec<Message<S>>,
    pub records: Vec<Record<S>>,
}

#[derive(Clone, Debug)]
pub struct PlannerNode<S> {
    planner: Planner<S>,
    inbound: BTreeMap<UavId, Inbound>,
    /// When a task list last went to each vehicle.
    list_sent: BTreeMap<UavId, S>,
    resend_after: S,
    pending: Vec<Event<S>>,
    started: bool,
}

fn event_of<S: Scalar>(r: &Report<S>) -> Event<S> {
    let uav = r.uav.clone();
    let kind = match &r.body {
        ReportBody::TaskOutcome { task, success: true, .. } => EventKind::TaskFinished { uav, task: task.clone() },
        ReportBody::TaskOutcome { task, success: false, reason } => EventKind::TaskFailed {
            uav,
            task: task.clone(),
            reason: reason.clone().unwrap_or_default(),
        },
        ReportBody::BatteryFault { level } => EventKind::BatteryFault { uav, level: *level },
    };
    Event::new(r.timestamp, kind)
}

fn rejection(e: &PlannerError) -> String {
    e.to_string()
}

impl<S: Scalar> PlannerNode<S> {
    pub fn new(planner: Planner<S>, resend_after: S) -> Self {
        Self {
            planner,
            inbound: BTreeMap::new(),
            list_sent: BTreeMap::new(),
            resend_after,
            pending: Vec::new(),
            started: false,
        }
    }

    pub fn planner(&self) -> &Planner<S> {
        &self.planner
    }

    pub fn set_worker(&mut self, id: WorkerId, at: Point3<S>) {
        self.planner.set_worker(id, at);
    }

    /// Queue an event for the next step.
    pub fn post(&mut self, e: Event<S>) {
        self.pending.push(e);
    }

    fn list_for(&self, uav: &UavId) -> TaskList<S> {
        let plan = self.planner.plan();
        TaskList {
            uav: uav.clone(),
            version: plan.version,
            entries: plan.entries(uav).to_vec(),
            mission_over: self.planner.mission_over(),
        }
    }

    fn send_list(&mut self, uav: &UavId, now: S, out: &mut NodeOutput<S>) {
        out.messages.push(Message::TaskList(self.list_for(uav)));
        self.list_sent.insert(uav.clone(), now);
    }

    fn feedback(&mut self, f: &Feedback<S>, now: S, causes: &mut Vec<ReplanCause>, out: &mut NodeOutput<S>) {
        match self.planner.observe(&f.uav, f.position, f.battery, f.active_task.as_ref(), f.progress.clone()) {
            Ok(Some(c)) => causes.push(c),
            Ok(None) => {}
            Err(e) => tracing::warn!(uav = %f.uav, error = %e, "feedback from unknown vehicle"),
        }
        let version = self.planner.plan().version;
        let due = self.list_sent.get(&f.uav).is_none_or(|t| now - *t >= self.resend_after - S::tol());
        if self.started && f.plan_version < version && due {
            let uav = f.uav.clone();
            self.send_list(&uav, now, out);
        }
    }

    /// One planner step at time `now` over the messages delivered to it.
    pub fn step(&mut self, now: S, delivered: Vec<Message<S>>) -> NodeOutput<S> {
        let mut out = NodeOutput::default();
        let mut causes = Vec::new();
        let mut events = std::mem::take(&mut self.pending);
        let mut reports = Vec::new();
        for m in &delivered {
            match m {
                Message::Feedback(f) => self.feedback(f, now, &mut causes, &mut out),
                Message::Report(r) => reports.push(r),
                _ => {}
            }
        }
        let mut acks: BTreeMap<UavId, u64> = BTreeMap::new();
        for r in reports {
            let inbound = self.inbound.entry(r.uav.clone()).or_default();
            if inbound.receive(r.seq) {
                events.push(event_of(r));
            }
            acks.insert(r.uav.clone(), inbound.contiguous);
        }
        for (uav, seq) in acks {
            if seq > 0 {
                out.messages.push(Message::Ack { uav, seq });
            }
        }
        events.sort_by(|a, b| a.timestamp.partial_cmp(&b.timestamp).unwrap_or(std::cmp::Ordering::Equal));
        for e in events {
            match self.planner.apply(&e) {
                Ok(c) => {
                    out.records.push(Record::Event { event: e });
                    causes.extend(c);
                }
                Err(err) => out.records.push(Record::Rejected { reason: rejection(&err), event: e }),
            }
        }
        causes.extend(self.planner.check_watchdogs(now));
        if !self.started {
            self.started = true;
            causes.insert(0, ReplanCause::Initial);
        }
        if !causes.is_empty() {
            let plan = self.planner.replan(now, &causes).clone();
            out.records.push(Record::Replan { version: plan.version, causes, plan });
            let ids: Vec<UavId> = self.planner.fleet().ids().cloned().collect();
            for u in ids {
                self.send_list(&u, now, &mut out);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inbound_dedups_and_tracks_contiguous_prefix() {
        let mut i = Inbound::default();
        assert!(i.receive(2));
        assert_eq!(i.contiguous, 0);
        assert!(!i.receive(2));
        assert!(i.receive(1));
        assert_eq!(i.contiguous, 2);
        assert!(!i.receive(1));
        assert!(i.receive(3));
        assert_eq!(i.contiguous, 3);
        assert!(i.seen.is_empty());
    }
}
