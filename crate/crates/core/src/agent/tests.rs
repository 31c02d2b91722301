use std::collections::BTreeMap;

use super::*;
use crate::domain::{Capability, PlanEntry, Target, Task, TaskKind, Work};
use crate::geometry::Point3;
use crate::protocol::Report;

type P = Point3<f64>;

fn p(x: f64, y: f64, z: f64) -> P {
    Point3::new(x, y, z)
}

fn spec() -> UavSpec<f64> {
    UavSpec {
        id: "uav-1".into(),
        capabilities: [Capability::Inspection, Capability::Monitoring, Capability::PhysicalInteraction].into(),
        speed: 5.0,
        battery_capacity: 100.0,
        travel_rate: 0.1,
        hover_rate: 0.05,
        reserve_fraction: 0.2,
        station: p(0.0, 0.0, 0.0),
    }
}

fn task(id: &str, kind: TaskKind, at: P, work: Work<f64>) -> Task<f64> {
    Task {
        id: id.into(),
        source_action: (!kind.is_artificial()).then(|| id.into()),
        kind,
        start_location: at,
        work,
        required_capability: kind.required_capability(),
        divisible: matches!(kind, TaskKind::Inspect | TaskKind::Monitor),
        sync_group: None,
        weight: 1.0,
        arrival_time: 0.0,
        target: None,
        origin: None,
        not_before: None,
    }
}

fn inspect(id: &str, wps: Vec<P>) -> Task<f64> {
    task(id, TaskKind::Inspect, wps[0], Work::Waypoints(wps))
}

fn monitor(id: &str, secs: f64) -> Task<f64> {
    let mut t = task(id, TaskKind::Monitor, p(10.0, 0.0, 5.0), Work::Duration(secs));
    t.target = Some(Target { worker: Some("w".into()), tool: None, offset: p(5.0, 0.0, 5.0) });
    t
}

fn deliver(id: &str, tool: &str) -> Task<f64> {
    let mut t = task(id, TaskKind::Deliver, p(5.0, 0.0, 3.0), Work::Duration(0.2));
    t.target = Some(Target { worker: Some("w".into()), tool: Some(tool.into()), offset: p(0.0, 0.0, 3.0) });
    t
}

fn list(version: u64, tasks: Vec<Task<f64>>) -> Message<f64> {
    let entries = tasks
        .into_iter()
        .map(|task| PlanEntry {
            task,
            est_start: 0.0,
            est_end: 0.0,
            est_battery_at_start: 0.0,
            est_battery_at_end: 0.0,
            resume: None,
        })
        .collect();
    Message::TaskList(TaskList { uav: "uav-1".into(), version, entries, mission_over: false })
}

/// Controller stub that reaches every commanded target within one step.
struct Instant {
    sensors: Sensors<f64>,
}

impl Instant {
    fn new() -> Self {
        let mut sensors = Sensors::parked(&spec());
        sensors.workers = BTreeMap::from([("w".into(), p(5.0, 0.0, 0.0))]);
        Self { sensors }
    }

    fn apply(&mut self, c: &Control<f64>) {
        let s = &mut self.sensors;
        s.time += 0.1;
        match c.motion {
            Motion::FlyTo(t) => {
                s.position = t;
                s.landed = false;
            }
            Motion::Land => s.landed = s.position == spec().station,
            Motion::Hold => {}
        }
        if c.recharge && s.landed {
            s.battery = spec().battery_capacity;
        }
        match &c.tool {
            Some(ToolOp::Pick(t)) => s.carried_tool = Some(t.clone()),
            Some(ToolOp::Release | ToolOp::Drop) => s.carried_tool = None,
            None => {}
        }
        if c.fault_consumed {
            s.controller_fault = false;
        }
    }

    fn step(&mut self, a: &mut Agent<f64>) -> TickOutput<f64> {
        let out = a.tick(self.sensors.clone());
        self.apply(&out.control);
        out
    }
}

fn agent() -> Agent<f64> {
    Agent::new(spec(), AgentConfig::default(), 10.0)
}

fn reports(out: &TickOutput<f64>) -> Vec<&Report<f64>> {
    out.messages.iter().filter_map(|m| if let Message::Report(r) = m { Some(r) } else { None }).collect()
}

fn failed_reports(out: &TickOutput<f64>) -> usize {
    reports(out)
        .iter()
        .filter(|r| matches!(r.body, ReportBody::TaskOutcome { success: false, .. }))
        .count()
}

#[test]
fn mission_over_runs_back_to_station() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(10.0, 0.0, 5.0);
    w.sensors.landed = false;
    w.sensors.battery = 50.0;
    a.receive(&Message::TaskList(TaskList { uav: "uav-1".into(), version: 1, entries: vec![], mission_over: true }));
    let out = w.step(&mut a);
    assert_eq!(out.feedback.bt_status, NodeStatus::Running);
    assert_eq!(a.tree().running_actions(), vec!["Back To Station"]);
    w.step(&mut a);
    let out = w.step(&mut a);
    assert_eq!(out.feedback.bt_status, NodeStatus::Success);
}

#[test]
fn low_battery_gates_tasks_and_recharges() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(50.0, 0.0, 0.0);
    w.sensors.landed = false;
    w.sensors.battery = 21.0;
    a.receive(&list(1, vec![inspect("i", vec![p(100.0, 0.0, 0.0)])]));
    let out = w.step(&mut a);
    assert_eq!(a.tree().running_actions(), vec!["Go near Charging Station"]);
    assert!(a.tree().find("Recharge Branch").unwrap().last_status().is_none());
    assert_eq!(out.feedback.active_task, None);
    // Once home and swapped the battery, the task goes ahead.
    let mut seen = Vec::new();
    for _ in 0..4 {
        w.step(&mut a);
        seen.extend(a.tree().running_actions().into_iter().map(str::to_owned));
    }
    seen.dedup();
    assert_eq!(seen, vec!["Recharge", "Go near WP"]);
}

#[test]
fn idle_with_full_battery_holds() {
    let mut a = agent();
    let mut w = Instant::new();
    let out = w.step(&mut a);
    assert_eq!(out.feedback.bt_status, NodeStatus::Running);
    assert!(a.tree().running_actions().is_empty());
    assert_eq!(out.control.motion, Motion::Hold);
}

#[test]
fn already_near_waypoint_goes_straight_to_inspection() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(10.0, 0.0, 10.0);
    a.receive(&list(1, vec![inspect("i", vec![p(10.0, 0.0, 10.5), p(20.0, 0.0, 10.0)])]));
    let out = w.step(&mut a);
    assert_eq!(a.tree().running_actions(), vec!["Inspection"]);
    assert_eq!(out.feedback.active_task, Some("i".into()));
}

#[test]
fn two_waypoint_inspection_succeeds_on_third_tick() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![inspect("i", vec![p(10.0, 0.0, 10.0), p(20.0, 0.0, 10.0)])]));
    for _ in 0..2 {
        let out = w.step(&mut a);
        assert!(reports(&out).is_empty());
        assert_eq!(a.tree().find("Inspection Task Tree").unwrap().last_status(), Some(NodeStatus::Running));
    }
    let out = w.step(&mut a);
    assert_eq!(a.tree().find("Inspection Task Tree").unwrap().last_status(), Some(NodeStatus::Success));
    let r = reports(&out);
    assert_eq!(r.len(), 1);
    assert!(matches!(&r[0].body, ReportBody::TaskOutcome { task, success: true, .. } if task.as_str() == "i"));
    assert!(a.ctx.queue.is_empty());
}

#[test]
fn delivery_picks_the_tool_first() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(20.0, 0.0, 5.0);
    w.sensors.landed = false;
    a.receive(&list(1, vec![deliver("d", "wrench")]));
    let mut order: Vec<String> = Vec::new();
    for _ in 0..10 {
        w.step(&mut a);
        for name in a.tree().running_actions() {
            if order.last().map(String::as_str) != Some(name) {
                order.push(name.to_owned());
            }
        }
        if a.ctx.queue.is_empty() {
            break;
        }
    }
    assert_eq!(order, vec!["Go near Station", "Go near Human Target", "Deliver Tool"]);
    assert!(a.ctx.queue.is_empty());
    assert_eq!(w.sensors.carried_tool, None);
}

#[test]
fn delivery_trace_visits_the_four_actions_in_order() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(20.0, 0.0, 5.0);
    w.sensors.landed = false;
    a.receive(&list(1, vec![deliver("d", "wrench")]));
    let wanted = ["Go near Station", "Pick Tool", "Go near Human Target", "Deliver Tool"];
    let mut seen: Vec<String> = Vec::new();
    for _ in 0..10 {
        a.ctx.control = Control::default();
        a.ctx.sensors = w.sensors.clone();
        let mut tree = std::mem::replace(&mut a.tree, BtNode::condition("x", |_| true));
        let (_, trace) = tree.tick_trace(&mut a.ctx);
        a.tree = tree;
        for e in trace {
            if wanted.contains(&e.name.as_str()) && seen.last() != Some(&e.name) {
                seen.push(e.name);
            }
        }
        let c = a.ctx.control.clone();
        w.apply(&c);
        if a.ctx.queue.is_empty() {
            break;
        }
    }
    assert_eq!(seen, wanted);
}

#[test]
fn recharge_far_from_station_flies_there_first() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(30.0, 0.0, 5.0);
    w.sensors.landed = false;
    w.sensors.battery = 60.0;
    a.receive(&list(1, vec![Task::recharge("recharge/uav-1/0".into(), p(0.0, 0.0, 0.0), 60.0)]));
    w.step(&mut a);
    assert_eq!(a.tree().running_actions(), vec!["Go near Charging Station"]);
    w.step(&mut a);
    assert_eq!(a.tree().running_actions(), vec!["Recharge"]);
}

#[test]
fn empty_list_makes_the_agent_idle() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![inspect("i", vec![p(10.0, 0.0, 0.0)])]));
    a.receive(&list(2, vec![]));
    w.step(&mut a);
    assert!(a.ctx.queue.is_empty());
    assert_eq!(a.tree().find("Idle?").unwrap().last_status(), Some(NodeStatus::Success));
}

#[test]
fn stale_list_is_ignored() {
    let mut a = agent();
    a.receive(&list(3, vec![inspect("i", vec![p(10.0, 0.0, 0.0)])]));
    a.receive(&list(2, vec![]));
    assert_eq!(a.ctx.queue.len(), 1);
    assert_eq!(a.ctx.plan_version, 3);
}

#[test]
fn queue_runs_in_order_through_a_recharge() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(
        1,
        vec![
            inspect("a/wp0-0", vec![p(10.0, 0.0, 10.0)]),
            Task::recharge("recharge/uav-1/0".into(), p(0.0, 0.0, 0.0), 60.0),
            inspect("a/wp1-1", vec![p(20.0, 0.0, 10.0)]),
        ],
    ));
    let mut done = Vec::new();
    for _ in 0..20 {
        let out = w.step(&mut a);
        for r in reports(&out) {
            if let ReportBody::TaskOutcome { task, success: true, .. } = &r.body {
                done.push(task.as_str().to_owned());
            }
            a.receive(&Message::Ack { uav: "uav-1".into(), seq: r.seq });
        }
    }
    assert_eq!(done, vec!["a/wp0-0", "recharge/uav-1/0", "a/wp1-1"]);
}

#[test]
fn replacing_the_running_task_halts_it() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![inspect("i", vec![p(10.0, 0.0, 10.0), p(20.0, 0.0, 10.0), p(30.0, 0.0, 10.0)])]));
    w.step(&mut a);
    w.step(&mut a);
    assert_eq!(a.tree().running_actions(), vec!["Inspection"]);
    a.receive(&list(2, vec![monitor("m", 5.0)]));
    let out = w.step(&mut a);
    assert!(out.halted.contains(&"Inspection".to_string()));
    assert_eq!(a.tree().running_actions(), vec!["Go near Human Target"]);
}

#[test]
fn battery_fault_mid_monitor_empties_queue_and_reports_once() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![monitor("m", 100.0), inspect("i", vec![p(1.0, 1.0, 1.0)])]));
    for _ in 0..5 {
        w.step(&mut a);
    }
    assert_eq!(a.tree().running_actions(), vec!["Monitoring"]);
    w.sensors.battery = 40.0;
    let out = w.step(&mut a);
    assert_eq!(out.emergency, Some(EmergencyCause::BatteryFault));
    assert!(a.ctx.queue.is_empty());
    assert_eq!(failed_reports(&out), 1);
    assert!(reports(&out).iter().any(|r| matches!(r.body, ReportBody::BatteryFault { .. })));
    assert_eq!(out.feedback.active_task, None);
    assert_eq!(a.tree().running_actions(), vec!["Go near Charging Station"]);
    assert_eq!(out.control.motion, Motion::FlyTo(spec().station));
}

#[test]
fn fault_while_idle_reports_no_failure() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(10.0, 0.0, 5.0);
    w.sensors.landed = false;
    w.step(&mut a);
    w.sensors.battery = 30.0;
    let out = w.step(&mut a);
    assert_eq!(out.emergency, Some(EmergencyCause::BatteryFault));
    assert_eq!(failed_reports(&out), 0);
    assert_eq!(out.control.motion, Motion::FlyTo(spec().station));
}

#[test]
fn comm_loss_fires_after_the_timeout_only() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![monitor("m", 1000.0)]));
    w.step(&mut a);
    w.sensors.link_up = false;
    let mut fired = 0;
    for _ in 0..100 {
        if w.step(&mut a).emergency.is_some() {
            fired += 1;
        }
    }
    assert_eq!(fired, 0);
    assert_eq!(a.ctx.queue.len(), 1);
    let out = w.step(&mut a);
    assert_eq!(out.emergency, Some(EmergencyCause::CommLoss));
    assert!(a.ctx.queue.is_empty());
    // Reports wait for the link.
    assert!(reports(&out).is_empty());
    w.sensors.link_up = true;
    let out = w.step(&mut a);
    assert_eq!(failed_reports(&out), 1);
}

#[test]
fn controller_failure_on_delivery_is_reported() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![deliver("d", "wrench")]));
    w.step(&mut a);
    w.sensors.controller_fault = true;
    let out = w.step(&mut a);
    assert_eq!(failed_reports(&out), 1);
    assert!(matches!(&reports(&out)[0].body, ReportBody::TaskOutcome { reason: Some(r), .. } if r == CONTROLLER));
    assert!(a.ctx.queue.is_empty());
    assert!(!w.sensors.controller_fault);
}

#[test]
fn wrong_tool_is_dropped_before_the_task() {
    let mut a = agent();
    let mut w = Instant::new();
    w.sensors.position = p(10.0, 0.0, 10.0);
    w.sensors.landed = false;
    w.sensors.carried_tool = Some("hammer".into());
    a.receive(&list(1, vec![inspect("i", vec![p(10.0, 0.0, 10.0)])]));
    w.step(&mut a);
    assert_eq!(a.tree().running_actions(), vec!["Go near Station"]);
    w.step(&mut a);
    assert_eq!(w.sensors.carried_tool, None);
    assert_eq!(a.tree().running_actions(), vec!["Go near WP"]);
}

#[test]
fn reports_are_resent_until_acked() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![inspect("i", vec![p(0.0, 0.0, 0.5)])]));
    let first = w.step(&mut a);
    assert_eq!(reports(&first).len(), 1);
    let mut resent = 0;
    for _ in 0..10 {
        resent += reports(&w.step(&mut a)).len();
    }
    assert_eq!(resent, 1);
    a.receive(&Message::Ack { uav: "uav-1".into(), seq: 1 });
    for _ in 0..20 {
        assert!(reports(&w.step(&mut a)).is_empty());
    }
}

#[test]
fn finished_task_in_a_late_list_is_skipped() {
    let mut a = agent();
    let mut w = Instant::new();
    a.receive(&list(1, vec![inspect("i", vec![p(0.0, 0.0, 0.5)]), monitor("m", 1.0)]));
    w.step(&mut a);
    a.receive(&list(2, vec![inspect("i", vec![p(0.0, 0.0, 0.5)]), monitor("m", 1.0)]));
    assert_eq!(a.ctx.head().unwrap().id.as_str(), "m");
}

#[test]
fn one_feedback_per_tick() {
    let mut a = agent();
    let mut w = Instant::new();
    for _ in 0..5 {
        let out = w.step(&mut a);
        assert_eq!(out.messages.iter().filter(|m| matches!(m, Message::Feedback(_))).count(), 1);
    }
}

mod props {
    use proptest::prelude::*;
    use skycrew_bt::{NodeKind, TraceEntry};

    use super::*;

    const TASK_ACTIONS: [&str; 10] = [
        "Go near WP",
        "Inspection",
        "Go near Human Target",
        "Monitoring",
        "Pick Tool",
        "Deliver Tool",
        "Go near Wait Spot",
        "Wait",
        "Report Task Done",
        "Report Task Failed",
    ];

    fn some_task(kind: u8, at: P) -> Task<f64> {
        match kind {
            0 => inspect("t", vec![at, p(at.x + 3.0, at.y, at.z)]),
            1 => monitor("t", 60.0),
            2 => deliver("t", "wrench"),
            _ => task("wait/uav-1/0", TaskKind::Wait, at, Work::Duration(20.0)),
        }
    }

    fn coord() -> impl Strategy<Value = f64> {
        -60.0..60.0
    }

    /// Tick the tree directly and return the leaves it touched.
    fn traced(a: &mut Agent<f64>) -> Vec<TraceEntry> {
        a.ctx.control = Control::default();
        let mut tree = std::mem::replace(&mut a.tree, BtNode::condition("x", |_| true));
        let (_, trace) = tree.tick_trace(&mut a.ctx);
        a.tree = tree;
        trace
    }

    proptest! {
        #[test]
        fn low_battery_never_ticks_task_actions(
            battery in 0.0..100.0f64,
            kind in 0u8..4,
            x in coord(), y in coord(), z in 0.0..30.0f64,
        ) {
            let mut a = agent();
            let at = p(x, y, z);
            a.receive(&list(1, vec![some_task(kind, p(y, x, 5.0))]));
            let mut s = Sensors::parked(&spec());
            s.workers = BTreeMap::from([("w".into(), p(5.0, 0.0, 0.0))]);
            s.position = at;
            s.landed = at == spec().station;
            s.battery = battery;
            a.ctx.sensors = s;
            let enough = a.ctx.battery_enough();
            let trace = traced(&mut a);
            if !enough {
                let ticked: Vec<&str> = trace
                    .iter()
                    .filter(|e| e.kind == NodeKind::Action && TASK_ACTIONS.contains(&e.name.as_str()))
                    .map(|e| e.name.as_str())
                    .collect();
                prop_assert!(ticked.is_empty(), "ticked {:?} at battery {}", ticked, battery);
            }
        }

        #[test]
        fn deliver_is_only_ticked_with_the_right_tool(
            carried in prop_oneof![Just(None), Just(Some("wrench")), Just(Some("hammer"))],
            x in coord(), y in coord(),
        ) {
            let mut a = agent();
            let mut w = Instant::new();
            w.sensors.position = p(x, y, 5.0);
            w.sensors.landed = false;
            w.sensors.carried_tool = carried.map(Into::into);
            a.receive(&list(1, vec![deliver("d", "wrench")]));
            for _ in 0..20 {
                a.ctx.sensors = w.sensors.clone();
                let holding = w.sensors.carried_tool.clone();
                let trace = traced(&mut a);
                if trace.iter().any(|e| e.name == "Deliver Tool") {
                    prop_assert_eq!(holding.as_ref().map(|t| t.as_str()), Some("wrench"));
                }
                let c = a.ctx.control.clone();
                w.apply(&c);
                if a.ctx.queue.is_empty() {
                    break;
                }
            }
            prop_assert!(a.ctx.queue.is_empty());
        }

        #[test]
        fn emergency_empties_the_queue_and_reports_each_interruption_once(
            kinds in proptest::collection::vec(0u8..3, 1..4),
            // Detection needs one earlier battery reading.
            ticks in 1usize..30,
        ) {
            let mut a = agent();
            let mut w = Instant::new();
            let tasks: Vec<Task<f64>> = kinds
                .iter()
                .enumerate()
                .map(|(i, k)| {
                    let mut t = some_task(*k, p(10.0 + i as f64, 5.0, 5.0));
                    t.id = TaskId::new(format!("t{i}"));
                    t
                })
                .collect();
            a.receive(&list(1, tasks));
            let mut failures: BTreeMap<u64, TaskId> = BTreeMap::new();
            let collect = |a: &mut Agent<f64>, out: &TickOutput<f64>, failures: &mut BTreeMap<u64, TaskId>| {
                for r in reports(out) {
                    if let ReportBody::TaskOutcome { task, success: false, .. } = &r.body {
                        failures.insert(r.seq, task.clone());
                    }
                    a.receive(&Message::Ack { uav: "uav-1".into(), seq: r.seq });
                }
            };
            for _ in 0..ticks {
                let out = w.step(&mut a);
                collect(&mut a, &out, &mut failures);
            }
            prop_assert!(failures.is_empty());
            let interrupted = a.last_active().cloned();
            w.sensors.battery -= 50.0;
            let out = w.step(&mut a);
            prop_assert_eq!(out.emergency, Some(EmergencyCause::BatteryFault));
            collect(&mut a, &out, &mut failures);
            prop_assert!(a.ctx.queue.is_empty());
            prop_assert_eq!(out.feedback.queued, 0);
            let reported: Vec<TaskId> = failures.into_values().collect();
            prop_assert_eq!(reported, interrupted.into_iter().collect::<Vec<_>>());
        }
    }
}
