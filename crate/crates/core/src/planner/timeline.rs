use std::collections::BTreeMap;

use crate::domain::{Fleet, Plan, PlanEntry, TaskKind, TaskProgress, Task, UavId, UavSpec};
use crate::geometry::Point3;
use crate::planner::energy::{leg, return_energy};
use crate::planner::PlannerConfig;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StartState<S> {
    pub position: Point3<S>,
    pub battery: S,
    pub time: S,
}

/// Estimated execution of one entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot<S> {
    pub start: S,
    pub end: S,
    pub battery_start: S,
    /// Lowest level reached, before any recharge restores it.
    pub battery_low: S,
    pub battery_end: S,
    pub end_position: Point3<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatteryFlag {
    /// The entry would start below the floor.
    StartBelowFloor(usize),
    /// After the entry the vehicle could not make it back to its station.
    CannotReturn(usize),
}

impl BatteryFlag {
    pub fn index(self) -> usize {
        match self {
            BatteryFlag::StartBelowFloor(i) | BatteryFlag::CannotReturn(i) => i,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Timeline<S> {
    pub slots: Vec<Slot<S>>,
    /// First entry breaking the battery floor, if any.
    pub flag: Option<BatteryFlag>,
    pub end: StartState<S>,
}

/// Energy floor used throughout planning: reserve plus safety margin.
pub(crate) fn floor<S: Scalar>(spec: &UavSpec<S>, cfg: &PlannerConfig<S>) -> S {
    spec.reserve() + cfg.safety_margin
}

/// Step the battery and clock through `items` in order.
pub fn simulate_sequence<'a, S: Scalar>(
    spec: &UavSpec<S>,
    start: StartState<S>,
    items: impl IntoIterator<Item = (&'a Task<S>, Option<&'a TaskProgress<S>>)>,
    floor: S,
) -> Timeline<S> {
    let mut state = start;
    let mut slots = Vec::new();
    let mut flag = None;
    for (i, (task, resume)) in items.into_iter().enumerate() {
        let l = leg(spec, state.position, task, resume);
        let low = state.battery - l.energy(spec);
        let end_battery = if task.kind == TaskKind::Recharge { spec.battery_capacity } else { low };
        let slot = Slot {
            start: state.time,
            end: state.time + l.duration(spec),
            battery_start: state.battery,
            battery_low: low,
            battery_end: end_battery,
            end_position: l.end,
        };
        if flag.is_none() {
            if slot.battery_start < floor - S::tol() {
                flag = Some(BatteryFlag::StartBelowFloor(i));
            } else if low - return_energy(spec, l.end) < floor - S::tol() {
                flag = Some(BatteryFlag::CannotReturn(i));
            }
        }
        state = StartState { position: l.end, battery: end_battery, time: slot.end };
        slots.push(slot);
    }
    Timeline { slots, flag, end: state }
}

pub(crate) fn start_of<'a, S: Scalar>(fleet: &'a Fleet<S>, uav: &UavId, now: S) -> Option<(&'a UavSpec<S>, StartState<S>)> {
    let v = fleet.get(uav)?;
    Some((&v.spec, StartState { position: v.state.position, battery: v.state.battery, time: now }))
}

/// Re-estimate `entries` in place; returns the battery flag.
pub(crate) fn retime<S: Scalar>(
    spec: &UavSpec<S>,
    start: StartState<S>,
    entries: &mut [PlanEntry<S>],
    floor: S,
) -> Timeline<S> {
    let tl = simulate_sequence(spec, start, entries.iter().map(|e| (&e.task, e.resume.as_ref())), floor);
    for (e, s) in entries.iter_mut().zip(&tl.slots) {
        e.est_start = s.start;
        e.est_end = s.end;
        e.est_battery_at_start = s.battery_start;
        e.est_battery_at_end = s.battery_end;
    }
    tl
}

/// Timeline of every vehicle in `plan`, starting from the fleet's current state.
pub fn simulate_plan<S: Scalar>(
    plan: &Plan<S>,
    fleet: &Fleet<S>,
    cfg: &PlannerConfig<S>,
) -> BTreeMap<UavId, Timeline<S>> {
    plan.assignments
        .iter()
        .filter_map(|(uav, entries)| {
            let (spec, start) = start_of(fleet, uav, plan.created_at)?;
            let tl = simulate_sequence(spec, start, entries.iter().map(|e| (&e.task, e.resume.as_ref())), floor(spec, cfg));
            Some((uav.clone(), tl))
        })
        .collect()
}

pub(crate) fn entry<S: Scalar>(task: Task<S>) -> PlanEntry<S> {
    PlanEntry {
        task,
        est_start: S::zero(),
        est_end: S::zero(),
        est_battery_at_start: S::zero(),
        est_battery_at_end: S::zero(),
        resume: None,
    }
}
