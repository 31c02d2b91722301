//! Kinematics, battery, stations, workers and link state of the simulated world.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::{Control, Motion, Sensors, ToolOp};
use crate::domain::{ToolId, UavId, UavSpec, WorkerId};
use crate::geometry::Point3;
use crate::scalar::Scalar;
use crate::scenario::{ScenarioConfig, Tower, WorkerSpec};

/// Per-vehicle link state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "link", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum LinkState<S> {
    Up,
    Down { until: S },
}

impl<S> LinkState<S> {
    pub fn is_up(&self) -> bool {
        matches!(self, LinkState::Up)
    }
}

/// Physical state of one vehicle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Body<S> {
    pub spec: UavSpec<S>,
    pub position: Point3<S>,
    pub battery: S,
    pub landed: bool,
    /// Out of battery; stays down for the rest of the run.
    pub grounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carried_tool: Option<ToolId>,
    pub controller_fault: bool,
    /// Seconds spent landed on the station with the swap requested.
    pub swap_elapsed: S,
    #[serde(skip)]
    command: Control<S>,
}

/// What happened physically in one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "what", rename_all = "snake_case")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub enum WorldEvent<S> {
    Swapped { uav: UavId },
    Delivered { uav: UavId, tool: ToolId, worker: Option<WorkerId> },
    Grounded { uav: UavId, position: Point3<S> },
}

/// Energy spent by one vehicle during one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepEnergy<S> {
    pub travel: S,
    pub hover: S,
    pub recharged: S,
    pub moved: S,
}

#[derive(Clone, Debug)]
pub struct World<S> {
    dt: S,
    step: u64,
    recharge_duration: S,
    bodies: BTreeMap<UavId, Body<S>>,
    links: BTreeMap<UavId, LinkState<S>>,
    workers: Vec<WorkerSpec<S>>,
    towers: Vec<Tower<S>>,
    last_energy: BTreeMap<UavId, StepEnergy<S>>,
}

const AT_STATION: f64 = 1e-6;

impl<S: Scalar> World<S> {
    pub fn new(s: &ScenarioConfig<S>) -> Self {
        let bodies = s
            .fleet
            .iter()
            .map(|spec| {
                let init = s.initial.get(&spec.id);
                let position = init.and_then(|i| i.position).unwrap_or(spec.station);
                let battery = init.and_then(|i| i.battery).unwrap_or(spec.battery_capacity);
                let body = Body {
                    spec: spec.clone(),
                    landed: position.distance(spec.station) <= S::lit(AT_STATION),
                    position,
                    battery,
                    grounded: false,
                    carried_tool: None,
                    controller_fault: false,
                    swap_elapsed: S::zero(),
                    command: Control::default(),
                };
                (spec.id.clone(), body)
            })
            .collect();
        Self {
            dt: s.dt,
            step: 0,
            recharge_duration: s.planner.recharge_duration,
            bodies,
            links: s.fleet.iter().map(|u| (u.id.clone(), LinkState::Up)).collect(),
            workers: s.world.workers.clone(),
            towers: s.world.towers.clone(),
            last_energy: BTreeMap::new(),
        }
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Simulated time, exactly `step * dt`.
    pub fn time(&self) -> S {
        S::lit(self.step as f64) * self.dt
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn bodies(&self) -> &BTreeMap<UavId, Body<S>> {
        &self.bodies
    }

    pub fn body(&self, id: &UavId) -> Option<&Body<S>> {
        self.bodies.get(id)
    }

    pub fn body_mut(&mut self, id: &UavId) -> Option<&mut Body<S>> {
        self.bodies.get_mut(id)
    }

    pub fn link(&self, id: &UavId) -> LinkState<S> {
        self.links.get(id).copied().unwrap_or(LinkState::Up)
    }

    pub fn links(&self) -> &BTreeMap<UavId, LinkState<S>> {
        &self.links
    }

    pub fn towers(&self) -> &[Tower<S>] {
        &self.towers
    }

    pub fn last_energy(&self, id: &UavId) -> Option<&StepEnergy<S>> {
        self.last_energy.get(id)
    }

    pub fn workers_at(&self, t: S) -> BTreeMap<WorkerId, Point3<S>> {
        self.workers.iter().map(|w| (w.id.clone(), w.position_at(t))).collect()
    }

    /// Take the link down until `until`; extends an ongoing drop-out.
    /// Returns whether the link was up.
    pub fn link_down(&mut self, id: &UavId, until: S) -> bool {
        let Some(l) = self.links.get_mut(id) else { return false };
        match l {
            LinkState::Up => {
                *l = LinkState::Down { until };
                true
            }
            LinkState::Down { until: u } => {
                *u = u.max(until);
                false
            }
        }
    }

    /// Bring back links whose drop-out is over. Returns the restored ids.
    pub fn restore_links(&mut self) -> Vec<UavId> {
        let now = self.time();
        let mut out = Vec::new();
        for (id, l) in self.links.iter_mut() {
            if let LinkState::Down { until } = l {
                if now >= *until - S::tol() {
                    *l = LinkState::Up;
                    out.push(id.clone());
                }
            }
        }
        out
    }

    pub fn sensors(&self, id: &UavId) -> Option<Sensors<S>> {
        let b = self.bodies.get(id)?;
        let now = self.time();
        Some(Sensors {
            time: now,
            position: b.position,
            battery: b.battery,
            landed: b.landed,
            carried_tool: b.carried_tool.clone(),
            link_up: self.link(id).is_up(),
            controller_fault: b.controller_fault,
            workers: self.workers_at(now),
        })
    }

    /// Latch the controller command an agent issued this step.
    pub fn command(&mut self, id: &UavId, c: Control<S>) {
        if let Some(b) = self.bodies.get_mut(id) {
            if c.fault_consumed {
                b.controller_fault = false;
            }
            b.command = c;
        }
    }

    /// Advance every vehicle by `dt` under its latched command.
    pub fn advance(&mut self) -> Vec<WorldEvent<S>> {
        let dt = self.dt;
        let now = self.time();
        let workers = self.workers_at(now);
        let mut events = Vec::new();
        self.last_energy.clear();
        for (id, b) in self.bodies.iter_mut() {
            let mut e = StepEnergy::default();
            if b.grounded {
                self.last_energy.insert(id.clone(), e);
                continue;
            }
            let spec = &b.spec;
            let at_station = b.position.distance(spec.station) <= S::lit(AT_STATION);
            match b.command.motion {
                Motion::FlyTo(target) => {
                    let reach = spec.speed * dt;
                    let next = b.position.step_toward(target, reach);
                    let moved = b.position.distance(next);
                    if moved > S::zero() || !b.landed {
                        b.landed = false;
                        e.moved = moved;
                        e.travel = spec.travel_rate * moved;
                        // Hover is only paid for the part of the step spent still.
                        let still = (S::one() - moved / reach).max(S::zero());
                        e.hover = spec.hover_rate * dt * still;
                    }
                    b.position = next;
                }
                Motion::Land if at_station => b.landed = true,
                Motion::Hold | Motion::Land => {
                    if !b.landed {
                        e.hover = spec.hover_rate * dt;
                    }
                }
            }
            let on_station = b.landed && b.position.distance(spec.station) <= S::lit(AT_STATION);
            if b.command.recharge && on_station {
                b.swap_elapsed += dt;
            } else {
                b.swap_elapsed = S::zero();
            }
            match &b.command.tool {
                Some(ToolOp::Pick(t)) => b.carried_tool = Some(t.clone()),
                Some(ToolOp::Release) => {
                    if let Some(tool) = b.carried_tool.take() {
                        let worker = workers
                            .iter()
                            .min_by(|a, c| a.1.distance(b.position).partial_cmp(&c.1.distance(b.position)).expect("finite"))
                            .map(|(w, _)| w.clone());
                        events.push(WorldEvent::Delivered { uav: id.clone(), tool, worker });
                    }
                }
                Some(ToolOp::Drop) => b.carried_tool = None,
                None => {}
            }
            b.command.tool = None;
            let spent = e.travel + e.hover;
            if spent >= b.battery && spent > S::zero() {
                e.travel = e.travel.min(b.battery);
                e.hover = b.battery - e.travel;
                b.battery = S::zero();
                b.grounded = true;
                b.landed = true;
                b.position.z = S::zero();
                events.push(WorldEvent::Grounded { uav: id.clone(), position: b.position });
            } else {
                b.battery -= spent;
            }
            if !b.grounded && b.swap_elapsed >= self.recharge_duration - S::tol() {
                e.recharged = spec.battery_capacity - b.battery;
                b.battery = spec.battery_capacity;
                b.swap_elapsed = S::zero();
                events.push(WorldEvent::Swapped { uav: id.clone() });
            }
            self.last_energy.insert(id.clone(), e);
        }
        self.step += 1;
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Capability;

    fn scenario() -> ScenarioConfig<f64> {
        let spec = UavSpec {
            id: "uav-1".into(),
            capabilities: [Capability::Inspection].into(),
            speed: 10.0,
            battery_capacity: 100.0,
            travel_rate: 0.1,
            hover_rate: 0.05,
            reserve_fraction: 0.2,
            station: Point3::new(0.0, 0.0, 0.0),
        };
        let mut s: ScenarioConfig<f64> = serde_json::from_value(serde_json::json!({
            "schema_version": 1, "duration": 100.0, "dt": 1.0, "fleet": []
        }))
        .unwrap();
        s.fleet.push(spec);
        s.planner.recharge_duration = 3.0;
        s
    }

    fn fly(w: &mut World<f64>, to: Point3<f64>) {
        w.command(&"uav-1".into(), Control { motion: Motion::FlyTo(to), ..Control::default() });
    }

    #[test]
    fn landed_vehicle_spends_nothing() {
        let mut w = World::new(&scenario());
        w.advance();
        assert_eq!(w.body(&"uav-1".into()).unwrap().battery, 100.0);
        assert_eq!(w.time(), 1.0);
    }

    #[test]
    fn straight_line_step() {
        let mut s = scenario();
        s.initial.insert("uav-1".into(), crate::scenario::InitialState { position: Some(Point3::new(0.0, 0.0, 10.0)), battery: None });
        let mut w = World::new(&s);
        fly(&mut w, Point3::new(100.0, 0.0, 10.0));
        w.advance();
        let b = w.body(&"uav-1".into()).unwrap();
        assert_eq!(b.position, Point3::new(10.0, 0.0, 10.0));
        assert!((b.battery - (100.0 - 0.1 * 10.0)).abs() < 1e-12);
    }

    #[test]
    fn arrival_is_clamped_and_the_rest_hovers() {
        let mut w = World::new(&scenario());
        fly(&mut w, Point3::new(0.0, 0.0, 4.0));
        w.advance();
        let b = w.body(&"uav-1".into()).unwrap();
        assert_eq!(b.position, Point3::new(0.0, 0.0, 4.0));
        assert!((b.battery - (100.0 - 0.4 - 0.05 * 0.6)).abs() < 1e-12);
    }

    #[test]
    fn swap_after_recharge_duration() {
        let mut s = scenario();
        s.initial.insert("uav-1".into(), crate::scenario::InitialState { position: None, battery: Some(30.0) });
        let mut w = World::new(&s);
        for _ in 0..2 {
            w.command(&"uav-1".into(), Control { motion: Motion::Land, recharge: true, ..Control::default() });
            assert!(w.advance().is_empty());
        }
        w.command(&"uav-1".into(), Control { motion: Motion::Land, recharge: true, ..Control::default() });
        assert_eq!(w.advance(), vec![WorldEvent::Swapped { uav: "uav-1".into() }]);
        assert_eq!(w.body(&"uav-1".into()).unwrap().battery, 100.0);
    }

    #[test]
    fn empty_battery_grounds() {
        let mut s = scenario();
        s.initial.insert("uav-1".into(), crate::scenario::InitialState { position: None, battery: Some(0.5) });
        let mut w = World::new(&s);
        fly(&mut w, Point3::new(100.0, 0.0, 0.0));
        let ev = w.advance();
        assert!(matches!(ev.as_slice(), [WorldEvent::Grounded { .. }]));
        let b = w.body(&"uav-1".into()).unwrap().clone();
        assert!(b.grounded && b.battery == 0.0);
        fly(&mut w, Point3::new(100.0, 0.0, 0.0));
        w.advance();
        assert_eq!(w.body(&"uav-1".into()).unwrap().position, b.position);
    }

    #[test]
    fn links_come_back_when_due() {
        let mut w = World::new(&scenario());
        assert!(w.link_down(&"uav-1".into(), 2.0));
        w.advance();
        assert!(w.restore_links().is_empty());
        w.advance();
        assert_eq!(w.restore_links(), vec![UavId::from("uav-1")]);
        assert!(w.link(&"uav-1".into()).is_up());
    }
}
