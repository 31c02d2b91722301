use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{
    CostBreakdown, Fleet, Plan, PlanEntry, SyncGroupId, Task, TaskId, TaskProgress, Unassignable,
    UnassignableReason, UavId,
};
use crate::geometry::Point3;
use crate::planner::cost::{compute_cost, Bidder};
use crate::planner::energy::leg;
use crate::planner::split::remainder;
use crate::planner::timeline::{entry, floor, retime, StartState};
use crate::planner::{insert_recharges, insert_waits, PlannerConfig};
use crate::scalar::Scalar;

/// A task a vehicle is already executing.
#[derive(Clone, Debug, PartialEq)]
pub struct Committed<S> {
    pub task: Task<S>,
    pub progress: Option<TaskProgress<S>>,
}

/// Everything one planning round starts from.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanningInput<S> {
    pub now: S,
    /// Vehicles available for this round, with their current state.
    pub fleet: Fleet<S>,
    pub committed: BTreeMap<UavId, Committed<S>>,
    /// Pending tasks; sorted internally by priority.
    pub tasks: Vec<Task<S>>,
}

/// One vehicle's bid at one assignment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Bid<S> {
    pub uav: UavId,
    pub position: Point3<S>,
    pub projected: Point3<S>,
    pub running_weight: Option<S>,
    /// False when the vehicle already holds a member of the task's sync group.
    pub eligible: bool,
    pub cost: CostBreakdown<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentStep<S> {
    pub task: Task<S>,
    pub bids: Vec<Bid<S>>,
    pub chosen: Option<UavId>,
    /// Running task interrupted by this assignment.
    pub preempted: Option<TaskId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Allocation<S> {
    pub plan: Plan<S>,
    pub trace: Vec<AssignmentStep<S>>,
    pub preempted: Vec<TaskId>,
}

struct Slate<'a, S> {
    uav: &'a UavId,
    bidder: Bidder<'a, S>,
    entries: Vec<PlanEntry<S>>,
    groups: BTreeSet<SyncGroupId>,
}

/// Greedy assignment in priority order: each task goes to the vehicle with
/// the lowest total cost, ties to the lowest id. The plan's timeline is
/// estimated but not yet made battery-feasible.
pub fn allocate<S: Scalar>(input: &PlanningInput<S>, cfg: &PlannerConfig<S>) -> Allocation<S> {
    let mut slates: Vec<Slate<'_, S>> = input
        .fleet
        .iter()
        .map(|v| {
            let mut bidder = Bidder::idle(&v.spec, v.state.position);
            let mut entries = Vec::new();
            let mut groups = BTreeSet::new();
            if let Some(c) = input.committed.get(&v.spec.id) {
                groups.extend(c.task.sync_group.clone());
                bidder.projected = leg(&v.spec, v.state.position, &c.task, c.progress.as_ref()).end;
                if !c.task.kind.is_artificial() {
                    bidder.running_weight = Some(c.task.weight);
                }
                let mut e = entry(c.task.clone());
                e.resume = c.progress.clone();
                entries.push(e);
            }
            Slate { uav: &v.spec.id, bidder, entries, groups }
        })
        .collect();

    // Sorted so that `pop` yields the highest-priority task.
    let mut work = input.tasks.clone();
    work.sort_by(|a, b| b.queue_cmp(a));
    let mut trace = Vec::new();
    let mut unassignable = Vec::new();
    let mut preempted = Vec::new();
    while let Some(task) = work.pop() {
        let bids: Vec<Bid<S>> = slates
            .iter()
            .map(|s| {
                let cost = compute_cost(&s.bidder, &task, cfg);
                let taken = task.sync_group.as_ref().is_some_and(|g| s.groups.contains(g));
                Bid {
                    uav: s.uav.clone(),
                    position: s.bidder.position,
                    projected: s.bidder.projected,
                    running_weight: s.bidder.running_weight,
                    eligible: !taken && cost.is_feasible(),
                    cost,
                }
            })
            .collect();
        let mut best: Option<usize> = None;
        for (i, b) in bids.iter().enumerate() {
            if b.eligible && best.is_none_or(|j| b.cost.total() < bids[j].cost.total()) {
                best = Some(i);
            }
        }
        let mut step = AssignmentStep { task: task.clone(), bids, chosen: None, preempted: None };
        match best {
            None => {
                let reason = if step.bids.iter().any(|b| b.cost.is_feasible()) {
                    UnassignableReason::NotEnoughVehicles
                } else {
                    UnassignableReason::NoCapableVehicle
                };
                unassignable.push(Unassignable { task: task.id.clone(), source_action: task.source_action.clone(), reason });
            }
            Some(i) => {
                let s = &mut slates[i];
                step.chosen = Some(s.uav.clone());
                if let Some(g) = &task.sync_group {
                    s.groups.insert(g.clone());
                }
                let from = if s.bidder.preempts(&task) {
                    let running = s.entries.remove(0);
                    step.preempted = Some(running.task.id.clone());
                    preempted.push(running.task.id.clone());
                    if let Some(rest) = remainder(&running.task, running.resume.as_ref()) {
                        let at = work.partition_point(|x| x.queue_cmp(&rest).is_gt());
                        work.insert(at, rest);
                    }
                    s.bidder.running_weight = None;
                    s.bidder.position
                } else {
                    s.bidder.projected
                };
                s.bidder.projected = leg(s.bidder.spec, from, &task, None).end;
                s.entries.push(entry(task));
            }
        }
        trace.push(step);
    }

    let mut plan = Plan { version: 0, created_at: input.now, assignments: BTreeMap::new(), unassignable };
    for s in slates {
        let mut entries = s.entries;
        let v = input.fleet.get(s.uav).expect("slate from fleet");
        let start = StartState { position: v.state.position, battery: v.state.battery, time: input.now };
        retime(&v.spec, start, &mut entries, floor(&v.spec, cfg));
        plan.assignments.insert(s.uav.clone(), entries);
    }
    Allocation { plan, trace, preempted }
}

/// Allocation followed by recharge and wait insertion.
pub fn plan_mission<S: Scalar>(input: &PlanningInput<S>, cfg: &PlannerConfig<S>) -> Allocation<S> {
    let mut a = allocate(input, cfg);
    a.plan = insert_recharges(&a.plan, &input.fleet, cfg);
    a.plan = insert_waits(&a.plan, &input.fleet, cfg);
    a
}
