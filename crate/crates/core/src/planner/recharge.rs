use std::collections::VecDeque;

use crate::domain::{
    Fleet, Plan, PlanEntry, Span, SyncGroupId, Task, TaskId, TaskKind, Unassignable, UnassignableReason, UavId,
    UavSpec,
};
use crate::geometry::path_length;
use crate::planner::cost::{compute_cost, Bidder};
use crate::planner::energy::{at_station, leg, return_energy};
use crate::planner::split::{monitor_slice, remainder, split_inspect, split_monitor, trim_monitor_front};
use crate::planner::timeline::{entry, floor, retime, start_of, StartState};
use crate::planner::waits::wait_spot;
use crate::planner::PlannerConfig;
use crate::scalar::Scalar;

/// Marker for provisional artificial ids, renumbered once a plan is final.
pub(crate) const PROVISIONAL: &str = "~";

pub(crate) struct IdGen(u64);

impl IdGen {
    pub(crate) fn new() -> Self {
        Self(0)
    }

    pub(crate) fn next(&mut self, kind: &str, uav: &UavId) -> TaskId {
        self.0 += 1;
        TaskId::new(format!("{kind}/{uav}/{PROVISIONAL}{}", self.0))
    }
}

pub(crate) struct PassResult<S> {
    pub entries: Vec<PlanEntry<S>>,
    pub unassignable: Vec<Unassignable>,
    /// Recharges that interrupt a monitoring task.
    pub monitor_breaks: Vec<TaskId>,
}

fn advance<S: Scalar>(spec: &UavSpec<S>, st: &mut StartState<S>, e: &PlanEntry<S>) {
    let l = leg(spec, st.position, &e.task, e.resume.as_ref());
    st.time += l.duration(spec);
    st.battery = if e.task.kind == TaskKind::Recharge { spec.battery_capacity } else { st.battery - l.energy(spec) };
    st.position = l.end;
}

/// Whether a vehicle leaving its station full could make progress on `task`.
fn feasible_from_full<S: Scalar>(spec: &UavSpec<S>, task: &Task<S>, fl: S) -> bool {
    let budget = spec.battery_capacity - fl + S::tol();
    let tr = spec.travel_rate;
    let st = spec.station;
    match task.kind {
        TaskKind::Inspect if task.divisible => {
            task.waypoints().iter().all(|w| tr * (st.distance(*w) * S::lit(2.0)) <= budget)
        }
        TaskKind::Monitor if task.divisible => {
            tr * st.distance(task.start_location) * S::lit(2.0) + spec.hover_rate * task.hold_duration().min(S::one())
                <= budget
        }
        _ => {
            let l = leg(spec, st, task, None);
            l.energy(spec) + return_energy(spec, l.end) <= budget
        }
    }
}

/// Largest prefix of a divisible task that still lets the vehicle get home.
fn split_prefix<S: Scalar>(spec: &UavSpec<S>, st: &StartState<S>, task: &Task<S>, fl: S) -> Option<(Task<S>, Task<S>)> {
    let tr = spec.travel_rate;
    match task.kind {
        TaskKind::Inspect => {
            let wps = task.waypoints();
            let approach = st.position.distance(*wps.first()?);
            let best = (1..wps.len())
                .filter(|&j| {
                    let used = tr * (approach + path_length(&wps[..j]));
                    st.battery - used - return_energy(spec, wps[j - 1]) >= fl - S::tol()
                })
                .max()?;
            Some(split_inspect(task, best))
        }
        TaskKind::Monitor => {
            if spec.hover_rate <= S::zero() {
                return None;
            }
            let d = task.hold_duration();
            let travel = tr * (st.position.distance(task.start_location) + spec.station.distance(task.start_location));
            let secs = ((st.battery - fl - travel + S::tol()) / spec.hover_rate).floor();
            let secs = secs.min((d - S::lit(1e-3)).floor());
            (secs >= S::one()).then(|| split_monitor(task, secs))
        }
        _ => None,
    }
}

/// Make one vehicle's sequence battery-feasible, splitting or preceding
/// tasks with recharges as needed.
pub(crate) fn recharge_pass<S: Scalar>(
    spec: &UavSpec<S>,
    start: StartState<S>,
    items: Vec<PlanEntry<S>>,
    cfg: &PlannerConfig<S>,
    ids: &mut IdGen,
) -> PassResult<S> {
    let fl = floor(spec, cfg);
    let cap = spec.battery_capacity;
    let mut st = start;
    let mut out = Vec::new();
    let mut unassignable = Vec::new();
    let mut monitor_breaks = Vec::new();
    let mut queue: VecDeque<PlanEntry<S>> = items.into();
    let recharge = |ids: &mut IdGen| entry(Task::recharge(ids.next("recharge", &spec.id), spec.station, cfg.recharge_duration));

    while let Some(e) = queue.pop_front() {
        if e.task.kind == TaskKind::Recharge {
            advance(spec, &mut st, &e);
            out.push(e);
            continue;
        }
        let l = leg(spec, st.position, &e.task, e.resume.as_ref());
        let fits = st.battery - l.energy(spec) - return_energy(spec, l.end) >= fl - S::tol();
        let full_here = at_station(spec, st.position) && st.battery >= cap - S::tol();
        let top_up = cfg.recharge_threshold > S::zero()
            && !e.task.kind.is_artificial()
            && e.resume.is_none()
            && st.battery < cfg.recharge_threshold * cap
            && !full_here;
        if fits && !top_up {
            advance(spec, &mut st, &e);
            out.push(e);
            continue;
        }
        if !fits && e.resume.is_some() {
            // A running task that no longer fits is rescheduled as a fresh piece.
            if let Some(r) = remainder(&e.task, e.resume.as_ref()) {
                queue.push_front(entry(r));
            }
            continue;
        }
        if !fits && e.task.divisible {
            if let Some((a, b)) = split_prefix(spec, &st, &e.task, fl) {
                let first = entry(a);
                advance(spec, &mut st, &first);
                out.push(first);
                let r = recharge(ids);
                if e.task.kind == TaskKind::Monitor {
                    monitor_breaks.push(r.task.id.clone());
                }
                advance(spec, &mut st, &r);
                out.push(r);
                queue.push_front(entry(b));
                continue;
            }
        }
        if !fits && (full_here || !feasible_from_full(spec, &e.task, fl)) {
            unassignable.push(Unassignable {
                task: e.task.id.clone(),
                source_action: e.task.source_action.clone(),
                reason: UnassignableReason::ExceedsBatteryCapacity,
            });
            continue;
        }
        let r = recharge(ids);
        // A recharge between two pieces of one monitoring also breaks it.
        let splits_monitor = e.task.kind == TaskKind::Monitor
            && out.last().is_some_and(|p: &PlanEntry<S>| {
                p.task.kind == TaskKind::Monitor && p.task.logical_id() == e.task.logical_id()
            });
        if splits_monitor {
            monitor_breaks.push(r.task.id.clone());
        }
        advance(spec, &mut st, &r);
        out.push(r);
        queue.push_front(e);
    }
    PassResult { entries: out, unassignable, monitor_breaks }
}

fn coverage_from<S: Scalar>(t: &Task<S>) -> S {
    match t.origin.as_ref().map(|o| &o.span) {
        Some(Span::Coverage { from, .. }) => *from,
        _ => S::zero(),
    }
}

/// Try to cover the gap left by the recharge `break_id` of `relieved` with
/// another vehicle. The relief goes ahead of the reliever's tasks of higher
/// weight. Returns the reliever.
fn schedule_relief<S: Scalar>(
    plan: &mut Plan<S>,
    fleet: &Fleet<S>,
    cfg: &PlannerConfig<S>,
    relieved: &UavId,
    break_id: &TaskId,
) -> Option<UavId> {
    let (spec_x, start_x) = start_of(fleet, relieved, plan.created_at)?;
    let entries = plan.assignments.get_mut(relieved).expect("relieved vehicle has a list");
    retime(spec_x, start_x, entries, floor(spec_x, cfg));
    let r = entries.iter().position(|e| &e.task.id == break_id)?;
    let part2 = entries.get(r + 1).filter(|e| e.task.kind == TaskKind::Monitor)?;
    let t1 = entries[r].est_start;
    let t3 = entries[r].est_end + spec_x.station.distance(part2.task.start_location) / spec_x.speed;
    let part2 = part2.task.clone();

    let mut best: Option<(S, UavId, Vec<PlanEntry<S>>, usize, S)> = None;
    for v in fleet.iter() {
        let y = &v.spec.id;
        if y == relieved || !v.spec.can(part2.required_capability) {
            continue;
        }
        let (spec, start) = start_of(fleet, y, plan.created_at).expect("in fleet");
        let ys = plan.assignments.get(y).cloned().unwrap_or_default();
        let at = ys
            .iter()
            .position(|e| !e.task.kind.is_artificial() && e.task.weight > part2.weight)
            .unwrap_or(ys.len());
        let mut head = ys[..at].to_vec();
        let tl = retime(spec, start, &mut head, floor(spec, cfg));
        if tl.flag.is_some() || tl.end.time > t1 + S::tol() {
            continue;
        }
        let gap = t1 - tl.end.time;
        let (spot, _, wait_energy) = wait_spot(spec, tl.end.position, &part2, gap);
        let approach = spot.distance(part2.start_location) / spec.speed;
        let hold = (t3 - t1 - approach).floor();
        if hold < S::one() {
            continue;
        }
        let slice = monitor_slice(&part2, coverage_from(&part2), hold);
        let l = leg(spec, spot, &slice, None);
        let left = tl.end.battery - wait_energy - l.energy(spec) - return_energy(spec, l.end);
        if left < floor(spec, cfg) - S::tol() {
            continue;
        }
        let cost = compute_cost(&Bidder::idle(spec, tl.end.position), &slice, cfg).total();
        if best.as_ref().is_none_or(|(c, ..)| cost < *c) {
            best = Some((cost, y.clone(), ys, at, hold));
        }
    }
    let (_, y, mut ys, at, hold) = best?;

    let group = SyncGroupId::new(format!("handover/{}", part2.id));
    let mut slice = monitor_slice(&part2, coverage_from(&part2), hold);
    slice.sync_group = Some(group.clone());
    ys.insert(at, entry(slice));
    plan.assignments.insert(y.clone(), ys);

    let entries = plan.assignments.get_mut(relieved).expect("relieved vehicle has a list");
    entries[r].task.sync_group = Some(group);
    match trim_monitor_front(&part2, hold) {
        Some(rest) => entries[r + 1] = entry(rest),
        None => {
            entries.remove(r + 1);
        }
    }
    Some(y)
}

/// Renumber provisional artificial ids per vehicle, after any kept ids.
pub(crate) fn renumber<S: Scalar>(plan: &mut Plan<S>) {
    for (uav, entries) in plan.assignments.iter_mut() {
        for kind in ["recharge", "wait"] {
            let prefix = format!("{kind}/{uav}/");
            let mut next = entries
                .iter()
                .filter_map(|e| e.task.id.as_str().strip_prefix(&prefix)?.parse::<u64>().ok())
                .max()
                .map_or(0, |m| m + 1);
            for e in entries.iter_mut() {
                let provisional = e.task.id.as_str().strip_prefix(&prefix).is_some_and(|r| r.starts_with(PROVISIONAL));
                if provisional {
                    e.task.id = TaskId::new(format!("{prefix}{next}"));
                    next += 1;
                }
            }
        }
    }
}

pub(crate) fn recharges_with_ids<S: Scalar>(
    plan: &Plan<S>,
    fleet: &Fleet<S>,
    cfg: &PlannerConfig<S>,
    ids: &mut IdGen,
) -> Plan<S> {
    let mut out = plan.clone();
    let mut breaks: VecDeque<(UavId, TaskId)> = VecDeque::new();
    for (uav, entries) in out.assignments.iter_mut() {
        let Some((spec, start)) = start_of(fleet, uav, plan.created_at) else { continue };
        let res = recharge_pass(spec, start, std::mem::take(entries), cfg, ids);
        *entries = res.entries;
        out.unassignable.extend(res.unassignable);
        breaks.extend(res.monitor_breaks.into_iter().map(|b| (uav.clone(), b)));
    }
    while let Some((uav, b)) = breaks.pop_front() {
        let Some(reliever) = schedule_relief(&mut out, fleet, cfg, &uav, &b) else { continue };
        for v in [uav, reliever] {
            let (spec, start) = start_of(fleet, &v, plan.created_at).expect("in fleet");
            let entries = out.assignments.get_mut(&v).expect("has list");
            let res = recharge_pass(spec, start, std::mem::take(entries), cfg, ids);
            *entries = res.entries;
            out.unassignable.extend(res.unassignable);
            breaks.extend(res.monitor_breaks.into_iter().map(|b| (v.clone(), b)));
        }
    }
    for (uav, entries) in out.assignments.iter_mut() {
        if let Some((spec, start)) = start_of(fleet, uav, plan.created_at) {
            retime(spec, start, entries, floor(spec, cfg));
        }
    }
    out
}

/// Insert recharges wherever a vehicle's battery would not last, splitting
/// divisible tasks at the last point from which it can still get home. A
/// monitoring interrupted this way is covered by another vehicle while the
/// first one recharges, when one is free.
pub fn insert_recharges<S: Scalar>(plan: &Plan<S>, fleet: &Fleet<S>, cfg: &PlannerConfig<S>) -> Plan<S> {
    let mut out = recharges_with_ids(plan, fleet, cfg, &mut IdGen::new());
    renumber(&mut out);
    out
}
