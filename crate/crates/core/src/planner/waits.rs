use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{Fleet, Plan, PlanEntry, SyncGroupId, Task, TaskKind, UavId, UavSpec};
use crate::geometry::Point3;
use crate::planner::energy::{at_station, leg};
use crate::planner::recharge::{recharge_pass, renumber, IdGen};
use crate::planner::timeline::{entry, floor, retime, start_of, StartState};
use crate::planner::PlannerConfig;
use crate::scalar::Scalar;

const HANDOVER: &str = "handover/";
const ALIGN_STEPS: usize = 400;
const REPAIR_ROUNDS: usize = 3;

/// Where to spend `gap` seconds before `next`: hovering in place, or on the
/// station when it can be reached in time and saves energy. Returns the
/// spot, the hold time once there and the energy used (including the change
/// in `next`'s approach).
pub(crate) fn wait_spot<S: Scalar>(spec: &UavSpec<S>, pos: Point3<S>, next: &Task<S>, gap: S) -> (Point3<S>, S, S) {
    if at_station(spec, pos) {
        return (pos, gap, S::zero());
    }
    let hover = spec.hover_rate * gap;
    let to_station = pos.distance(spec.station) / spec.speed;
    if to_station <= gap {
        let delta = leg(spec, spec.station, next, None).energy(spec) - leg(spec, pos, next, None).energy(spec);
        let landed = spec.travel_rate * pos.distance(spec.station) + delta;
        if landed < hover - S::tol() {
            return (spec.station, gap - to_station, landed);
        }
    }
    (pos, gap, hover)
}

fn is_planned_wait<S: Scalar>(e: &PlanEntry<S>) -> bool {
    e.task.kind == TaskKind::Wait && e.resume.is_none()
}

struct Ctx<'a, S> {
    fleet: &'a Fleet<S>,
    cfg: &'a PlannerConfig<S>,
    now: S,
}

impl<S: Scalar> Ctx<'_, S> {
    fn start(&self, uav: &UavId) -> (&UavSpec<S>, StartState<S>) {
        start_of(self.fleet, uav, self.now).expect("planned vehicle is in the fleet")
    }

    fn retime_all(&self, plan: &mut Plan<S>) -> BTreeSet<UavId> {
        let mut flagged = BTreeSet::new();
        for (uav, entries) in plan.assignments.iter_mut() {
            if !self.fleet.contains(uav) {
                continue;
            }
            let (spec, start) = self.start(uav);
            if retime(spec, start, entries, floor(spec, self.cfg)).flag.is_some() {
                flagged.insert(uav.clone());
            }
        }
        flagged
    }
}

fn strip_waits<S: Scalar>(entries: &mut Vec<PlanEntry<S>>) {
    entries.retain(|e| !is_planned_wait(e));
}

/// Delay entry `idx` of `uav` to depart at `target` by (re)building the Wait before it.
fn wait_before<S: Scalar>(ctx: &Ctx<'_, S>, plan: &mut Plan<S>, uav: &UavId, mut idx: usize, target: S, ids: &mut IdGen) {
    let (spec, start) = ctx.start(uav);
    let entries = plan.assignments.get_mut(uav).expect("has list");
    if idx > 0 && is_planned_wait(&entries[idx - 1]) {
        entries.remove(idx - 1);
        idx -= 1;
    }
    let tl = retime(spec, start, entries, floor(spec, ctx.cfg));
    let ready = tl.slots[idx].start;
    let pos = if idx == 0 { start.position } else { tl.slots[idx - 1].end_position };
    let gap = target - ready;
    if gap <= S::tol() {
        return;
    }
    let (spot, hold, _) = wait_spot(spec, pos, &entries[idx].task, gap);
    entries.insert(idx, entry(Task::wait(ids.next("wait", uav), spot, hold)));
}

enum Fix<S> {
    Delay(UavId, usize, S),
    Relax(SyncGroupId),
}

fn next_fix<S: Scalar>(plan: &Plan<S>, relaxed: &BTreeSet<SyncGroupId>) -> Option<Fix<S>> {
    for (uav, entries) in &plan.assignments {
        for (i, e) in entries.iter().enumerate() {
            if let Some(nb) = e.task.not_before {
                if e.est_start < nb - S::tol() {
                    return Some(Fix::Delay(uav.clone(), i, nb));
                }
            }
        }
    }
    let mut groups: BTreeMap<&SyncGroupId, Vec<(&UavId, usize, &PlanEntry<S>)>> = BTreeMap::new();
    for (uav, entries) in &plan.assignments {
        for (i, e) in entries.iter().enumerate() {
            if let Some(g) = e.task.sync_group.as_ref().filter(|g| !relaxed.contains(*g)) {
                groups.entry(g).or_default().push((uav, i, e));
            }
        }
    }
    for (g, members) in groups {
        if members.len() < 2 {
            continue;
        }
        if g.as_str().starts_with(HANDOVER) {
            let Some(anchor) = members.iter().find(|m| m.2.task.kind == TaskKind::Recharge) else { continue };
            let target = anchor.2.est_start;
            for m in &members {
                if m.2.task.kind == TaskKind::Recharge {
                    continue;
                }
                if m.2.est_start > target + S::tol() {
                    return Some(Fix::Relax(g.clone()));
                }
                if m.2.est_start < target - S::tol() {
                    return Some(Fix::Delay(m.0.clone(), m.1, target));
                }
            }
        } else {
            let target = members.iter().map(|m| m.2.est_start).fold(S::neg_infinity(), S::max);
            if let Some(m) = members.iter().find(|m| m.2.est_start < target - S::tol()) {
                return Some(Fix::Delay(m.0.clone(), m.1, target));
            }
        }
    }
    None
}

/// Rebuild all waits so every constraint holds; groups that cannot be
/// aligned are added to `relaxed`.
fn align<S: Scalar>(ctx: &Ctx<'_, S>, plan: &mut Plan<S>, relaxed: &mut BTreeSet<SyncGroupId>, ids: &mut IdGen) {
    for entries in plan.assignments.values_mut() {
        strip_waits(entries);
    }
    let mut steps = 0;
    loop {
        ctx.retime_all(plan);
        let Some(fix) = next_fix(plan, relaxed) else { break };
        steps += 1;
        match fix {
            Fix::Relax(g) => {
                relaxed.insert(g);
            }
            Fix::Delay(uav, idx, target) => {
                if steps > ALIGN_STEPS {
                    // Constraints chasing each other; give up on this one.
                    let e = &mut plan.assignments.get_mut(&uav).expect("has list")[idx];
                    match e.task.sync_group.clone() {
                        Some(g) => {
                            relaxed.insert(g);
                        }
                        None => e.task.not_before = None,
                    }
                    continue;
                }
                wait_before(ctx, plan, &uav, idx, target, ids);
            }
        }
    }
}

fn drop_constraints<S: Scalar>(entries: &mut [PlanEntry<S>], relaxed: &mut BTreeSet<SyncGroupId>) {
    for e in entries {
        if let Some(g) = e.task.sync_group.clone() {
            relaxed.insert(g);
        }
        e.task.not_before = None;
    }
}

/// Align sync groups on their latest member (a handover on the relieved
/// vehicle's recharge) and honor earliest-start constraints by inserting
/// Wait tasks, then re-check batteries. Groups that cannot be met without
/// breaking the battery floor lose their sync tag.
pub fn insert_waits<S: Scalar>(plan: &Plan<S>, fleet: &Fleet<S>, cfg: &PlannerConfig<S>) -> Plan<S> {
    let ctx = Ctx { fleet, cfg, now: plan.created_at };
    let mut p = plan.clone();
    p.assignments.retain(|u, _| fleet.contains(u));
    let mut ids = IdGen::new();
    let mut relaxed = BTreeSet::new();
    let mut round = 0;
    loop {
        align(&ctx, &mut p, &mut relaxed, &mut ids);
        let flagged = ctx.retime_all(&mut p);
        if flagged.is_empty() {
            break;
        }
        for uav in &flagged {
            let (spec, start) = ctx.start(uav);
            let entries = p.assignments.get_mut(uav).expect("has list");
            if round >= REPAIR_ROUNDS {
                drop_constraints(entries, &mut relaxed);
                strip_waits(entries);
            }
            let res = recharge_pass(spec, start, std::mem::take(entries), cfg, &mut ids);
            *entries = res.entries;
            p.unassignable.extend(res.unassignable);
        }
        round += 1;
        if round > 2 * (REPAIR_ROUNDS + fleet.len() + 1) {
            // Only reachable when a vehicle starts below its floor.
            break;
        }
        if round > REPAIR_ROUNDS + fleet.len() + 1 {
            for entries in p.assignments.values_mut() {
                drop_constraints(entries, &mut relaxed);
            }
        }
    }
    for e in p.assignments.values_mut().flatten() {
        if e.task.sync_group.as_ref().is_some_and(|g| relaxed.contains(g)) {
            e.task.sync_group = None;
        }
    }
    renumber(&mut p);
    ctx.retime_all(&mut p);
    p
}
