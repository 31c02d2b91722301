//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skycrew_core::domain::{
    ActionId, ActionParams, ActionRequest, Capability, Fleet, Task, UavSpec, UavState, ToolId, UavId, WorkerId,
};
use skycrew_core::geometry::Point3;
use skycrew_core::planner::{expand_action, Committed, PlannerConfig, PlanningInput, TypeCost};
use skycrew_core::scenario::{Fault, Layout, ScenarioConfig, ScheduledFault, WorkerSpec};

pub const FIG4: &str = include_str!("../../../../scenarios/fig4.json");

pub fn fig4() -> ScenarioConfig<f64> {
    ScenarioConfig::from_json(FIG4).expect("fig4 scenario parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn point(r: &mut ChaCha8Rng, span: f64, z: (f64, f64)) -> Point3<f64> {
    Point3::new(r.random_range(-span..span), r.random_range(-span..span), r.random_range(z.0..=z.1))
}

const ALL: [Capability; 3] = [Capability::Inspection, Capability::Monitoring, Capability::PhysicalInteraction];

fn capabilities(r: &mut ChaCha8Rng) -> BTreeSet<Capability> {
    loop {
        let caps: BTreeSet<Capability> = ALL.iter().copied().filter(|_| r.random_bool(0.6)).collect();
        if !caps.is_empty() {
            return caps;
        }
    }
}

pub fn uav(r: &mut ChaCha8Rng, i: usize, span: f64) -> UavSpec<f64> {
    UavSpec {
        id: UavId::new(format!("uav-{}", i + 1)),
        capabilities: capabilities(r),
        speed: r.random_range(3.0..8.0),
        battery_capacity: 100.0,
        travel_rate: r.random_range(0.05..0.15),
        hover_rate: r.random_range(0.02..0.1),
        reserve_fraction: r.random_range(0.15..0.3),
        station: point(r, span, (0.0, 0.0)),
    }
}

pub fn action(r: &mut ChaCha8Rng, i: usize, worker: &WorkerId, span: f64) -> ActionRequest<f64> {
    let params = match r.random_range(0..3) {
        0 => ActionParams::Inspect { waypoints: (0..r.random_range(1..=4)).map(|_| point(r, span, (5.0, 20.0))).collect() },
        1 => ActionParams::Monitor { worker: worker.clone(), vehicles: r.random_range(1..=2), duration: r.random_range(30.0..300.0) },
        _ => ActionParams::Deliver { tool: ToolId::new(format!("tool-{i}")), worker: worker.clone() },
    };
    ActionRequest { id: ActionId::new(format!("a{i}")), weight: r.random_range(1..=5) as f64, arrival_time: 0.0, params }
}

fn type_costs(r: &mut ChaCha8Rng, fleet: &[UavSpec<f64>]) -> Vec<TypeCost<f64>> {
    let mut out = Vec::new();
    for s in fleet {
        for kind in [skycrew_core::domain::TaskKind::Inspect, skycrew_core::domain::TaskKind::Monitor, skycrew_core::domain::TaskKind::Deliver] {
            if r.random_bool(0.3) {
                out.push(TypeCost { profile: s.capabilities.clone(), task: kind, cost: r.random_range(0.0..40.0) });
            }
        }
    }
    out
}

/// A planning round over up to `max_uavs` vehicles and about `max_tasks` tasks.
pub fn planning_instance(seed: u64, max_uavs: usize, max_tasks: usize) -> (PlanningInput<f64>, PlannerConfig<f64>) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_uavs);
    let specs: Vec<UavSpec<f64>> = (0..n).map(|i| uav(&mut r, i, 100.0)).collect();
    let worker = WorkerId::new("w");
    let workers = BTreeMap::from([(worker.clone(), point(&mut r, 60.0, (0.0, 0.0)))]);
    let cfg = PlannerConfig {
        travel_weight: r.random_range(0.5..2.0),
        interruption_weight: r.random_range(0.0..2.0),
        type_cost_matrix: type_costs(&mut r, &specs),
        safety_margin: 2.0,
        recharge_duration: 30.0,
        ..PlannerConfig::default()
    };
    let mut fleet = Fleet::new();
    for s in &specs {
        let state = UavState { battery: r.random_range(40.0..=100.0), ..UavState::parked(s) };
        fleet.insert(s.clone(), state).expect("unique");
    }
    let mut tasks: Vec<Task<f64>> = Vec::new();
    let mut i = 0;
    while tasks.len() < max_tasks {
        let a = action(&mut r, i, &worker, 60.0);
        i += 1;
        let ts = expand_action(&a, &workers, &cfg).expect("valid action");
        if tasks.len() + ts.len() > max_tasks {
            if r.random_bool(0.5) {
                break;
            }
            continue;
        }
        tasks.extend(ts);
        if r.random_bool(1.0 / max_tasks as f64) {
            break;
        }
    }
    (PlanningInput { now: 0.0, fleet, committed: BTreeMap::new(), tasks }, cfg)
}

/// A small random mission without faults. Every action has a capable vehicle.
pub fn random_scenario(seed: u64) -> ScenarioConfig<f64> {
    let mut r = rng(seed);
    let n = r.random_range(1..=3);
    let mut fleet: Vec<UavSpec<f64>> = (0..n).map(|i| uav(&mut r, i, 80.0)).collect();
    fleet[0].capabilities.extend(ALL);
    let worker = WorkerId::new("worker-1");
    let actions: Vec<ActionRequest<f64>> = (0..r.random_range(1..=4))
        .map(|i| {
            let mut a = action(&mut r, i, &worker, 60.0);
            if r.random_bool(0.3) {
                a.arrival_time = r.random_range(0.0..100.0);
            }
            a
        })
        .collect();
    let mut s: ScenarioConfig<f64> = serde_json::from_value(serde_json::json!({
        "schema_version": 1, "duration": 4000.0, "fleet": []
    }))
    .expect("minimal scenario");
    s.name = format!("random-{seed}");
    s.seed = seed;
    s.planner = PlannerConfig {
        type_cost_matrix: type_costs(&mut r, &fleet),
        safety_margin: 3.0,
        recharge_duration: 30.0,
        watchdog_timeout: 10.0,
        ..PlannerConfig::default()
    };
    s.world = Layout { towers: vec![], workers: vec![WorkerSpec { id: worker, position: point(&mut r, 60.0, (0.0, 0.0)), route: vec![] }] };
    s.fleet = std::mem::take(&mut fleet);
    s.actions = actions;
    s
}

/// Exactly `uavs` vehicles and `tasks` tasks, for timing.
pub fn large_instance(seed: u64, uavs: usize, tasks: usize) -> (PlanningInput<f64>, PlannerConfig<f64>) {
    let mut r = rng(seed);
    let specs: Vec<UavSpec<f64>> = (0..uavs).map(|i| uav(&mut r, i, 200.0)).collect();
    let worker = WorkerId::new("w");
    let workers = BTreeMap::from([(worker.clone(), point(&mut r, 100.0, (0.0, 0.0)))]);
    let cfg = PlannerConfig {
        type_cost_matrix: type_costs(&mut r, &specs),
        safety_margin: 2.0,
        recharge_duration: 30.0,
        ..PlannerConfig::default()
    };
    let mut fleet = Fleet::new();
    for s in &specs {
        fleet.insert(s.clone(), UavState::parked(s)).expect("unique");
    }
    let mut out: Vec<Task<f64>> = Vec::new();
    let mut i = 0;
    while out.len() < tasks {
        let mut a = action(&mut r, i, &worker, 150.0);
        if let ActionParams::Monitor { vehicles, .. } = &mut a.params {
            *vehicles = 1;
        }
        i += 1;
        out.extend(expand_action(&a, &workers, &cfg).expect("valid action"));
    }
    (PlanningInput { now: 0.0, fleet, committed: BTreeMap::new(), tasks: out }, cfg)
}

/// Like [`planning_instance`], with some vehicles already running a task.
pub fn committed_instance(seed: u64, max_uavs: usize, max_tasks: usize) -> (PlanningInput<f64>, PlannerConfig<f64>) {
    let (mut input, cfg) = planning_instance(seed, max_uavs, max_tasks);
    let mut r = rng(seed ^ 0x9e37_79b9);
    let ids: Vec<UavId> = input.fleet.ids().cloned().collect();
    for id in ids {
        if !r.random_bool(0.5) {
            continue;
        }
        let spec = &input.fleet.get(&id).expect("own id").spec;
        let Some(i) = input.tasks.iter().position(|t| spec.can(t.required_capability)) else { continue };
        let task = input.tasks.remove(i);
        input.committed.insert(id, Committed { task, progress: None });
    }
    (input, cfg)
}

/// Vehicles that differ only in id and station, all batteries full.
pub fn uniform_instance(seed: u64, uavs: usize, max_tasks: usize) -> (PlanningInput<f64>, PlannerConfig<f64>) {
    let (mut input, mut cfg) = planning_instance(seed, 1, max_tasks);
    let mut r = rng(seed ^ 0x5bd1_e995);
    let base = input.fleet.iter().next().expect("one vehicle").spec.clone();
    cfg.type_cost_matrix.retain(|c| c.profile == base.capabilities);
    let mut fleet = Fleet::new();
    for i in 0..uavs {
        let spec = UavSpec { id: UavId::new(format!("uav-{}", i + 1)), station: point(&mut r, 100.0, (0.0, 0.0)), ..base.clone() };
        fleet.insert(spec.clone(), UavState::parked(&spec)).expect("unique");
    }
    input.fleet = fleet;
    (input, cfg)
}

/// [`random_scenario`] with a few scheduled faults and some message loss.
pub fn faulty_scenario(seed: u64) -> ScenarioConfig<f64> {
    let mut s = random_scenario(seed);
    let mut r = rng(seed ^ 0x2545_f491);
    let ids: Vec<UavId> = s.fleet.iter().map(|u| u.id.clone()).collect();
    for _ in 0..r.random_range(1..=3) {
        let uav = ids[r.random_range(0..ids.len())].clone();
        let at = r.random_range(1.0..300.0);
        let fault = match r.random_range(0..3) {
            0 => Fault::CommDown { uav, duration: r.random_range(1.0..30.0) },
            1 => Fault::BatteryDrop { uav, level: r.random_range(20.0..60.0) },
            _ => Fault::ControllerFailure { uav },
        };
        s.faults.push(ScheduledFault { at, fault });
    }
    if r.random_bool(0.5) {
        s.link.loss_probability = r.random_range(0.0..0.2);
    }
    s
}
