//! Plan reports and the schedule drawn in the Gantt chart.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use skycrew_core::domain::{ActionId, EventKind, TaskId, TaskKind, UavId, Unassignable};
use skycrew_core::planner::ReplanCause;
use skycrew_core::sim::{EndOutcome, Record};
use skycrew_core::{LogEntry, Plan};

/// One replan, as written to `plans/plan-vNNNN.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub version: u64,
    pub step: u64,
    pub time: f64,
    pub causes: Vec<ReplanCause>,
    pub plan: Plan,
}

pub fn plan_reports(log: &[LogEntry]) -> Vec<PlanReport> {
    log.iter()
        .filter_map(|e| match &e.record {
            Record::Replan { version, causes, plan } => Some(PlanReport {
                version: *version,
                step: e.step,
                time: e.time,
                causes: causes.clone(),
                plan: plan.clone(),
            }),
            _ => None,
        })
        .collect()
}

/// A task as last planned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub uav: UavId,
    pub task: TaskId,
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionId>,
    pub start: f64,
    pub end: f64,
    /// Plan version the times come from.
    pub version: u64,
    pub finished: bool,
}

/// Every finished task and every task of the final plan, each timed by the
/// last plan that scheduled it before it started. Replans restart the
/// estimates of running tasks at the replan time, so later versions would
/// misplace them. A task counts as started once feedback reports it active;
/// feedback is sampled, so a task that started moments before a replan keeps
/// that replan's times. Tasks dropped unfinished, such as pieces superseded
/// by a re-split, are left out. Bars are ordered by vehicle, then start.
pub fn schedule(log: &[LogEntry]) -> Vec<Bar> {
    let mut started: BTreeSet<TaskId> = BTreeSet::new();
    let mut finished: BTreeSet<TaskId> = BTreeSet::new();
    let mut bars: BTreeMap<TaskId, Bar> = BTreeMap::new();
    let mut last: Option<&Plan> = None;
    for e in log {
        match &e.record {
            Record::Feedback { feedback } => started.extend(feedback.active_task.clone()),
            Record::Event { event } => {
                if let EventKind::TaskFinished { task, .. } = &event.kind {
                    finished.insert(task.clone());
                }
            }
            Record::Replan { version, plan, .. } => {
                for (uav, p) in plan.all_entries() {
                    if started.contains(&p.task.id) && bars.contains_key(&p.task.id) {
                        continue;
                    }
                    let bar = Bar {
                        uav: uav.clone(),
                        task: p.task.id.clone(),
                        kind: p.task.kind,
                        action: p.task.source_action.clone(),
                        start: p.est_start,
                        end: p.est_end,
                        version: *version,
                        finished: false,
                    };
                    bars.insert(p.task.id.clone(), bar);
                }
                last = Some(plan);
            }
            _ => {}
        }
    }
    let mut out: Vec<Bar> = bars
        .into_values()
        .map(|b| Bar { finished: finished.contains(&b.task), ..b })
        .filter(|b| b.finished || last.is_some_and(|p| p.entries(&b.uav).iter().any(|e| e.task.id == b.task)))
        .collect();
    out.sort_by(|a, b| a.uav.cmp(&b.uav).then(a.start.total_cmp(&b.start)).then(a.end.total_cmp(&b.end)));
    out
}

/// Body of `plan.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionReport {
    pub scenario: String,
    pub seed: u64,
    pub outcome: Option<EndOutcome>,
    pub end_time: f64,
    pub final_version: u64,
    pub replans: usize,
    pub schedule: Vec<Bar>,
    /// Work the final plan could not place, with reasons.
    pub unassignable: Vec<Unassignable>,
}

impl MissionReport {
    pub fn new(log: &[LogEntry]) -> Self {
        let reports = plan_reports(log);
        let (scenario, seed) = match log.first().map(|e| &e.record) {
            Some(Record::Header { scenario }) => (scenario.name.clone(), scenario.seed),
            _ => (String::new(), 0),
        };
        let outcome = log.iter().rev().find_map(|e| match e.record {
            Record::End { outcome, .. } => Some(outcome),
            _ => None,
        });
        let last = reports.last();
        Self {
            scenario,
            seed,
            outcome,
            end_time: log.last().map_or(0.0, |e| e.time),
            final_version: last.map_or(0, |r| r.version),
            replans: reports.len(),
            schedule: schedule(log),
            unassignable: last.map(|r| r.plan.unassignable.clone()).unwrap_or_default(),
        }
    }
}
