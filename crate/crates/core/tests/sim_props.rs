mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use skycrew_core::domain::UavId;
use skycrew_core::scenario::Fault;
use skycrew_core::sim::{replay, replay_to, LogEntry, Mission, Record};

const TOL: f64 = 1e-9;

fn short(mut s: skycrew_core::scenario::ScenarioConfig<f64>) -> skycrew_core::scenario::ScenarioConfig<f64> {
    s.duration = s.duration.min(900.0);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_motion_and_clock(seed in 0u64..100_000) {
        let mut m = Mission::new(short(common::faulty_scenario(seed)));
        while m.ended().is_none() {
            let before: BTreeMap<UavId, (f64, skycrew_core::geometry::Point3<f64>)> =
                m.world().bodies().iter().map(|(id, b)| (id.clone(), (b.battery, b.position))).collect();
            let k = m.world().step_index();
            let t0 = m.time();
            let entries = m.step().to_vec();
            if m.ended().is_some() && m.world().step_index() == k {
                break;
            }
            prop_assert_eq!(m.world().step_index(), k + 1);
            prop_assert_eq!(m.time(), (k + 1) as f64 * m.world().dt());
            prop_assert!((m.time() - t0 - m.world().dt()).abs() < TOL);
            let dropped: Vec<&UavId> = entries
                .iter()
                .filter_map(|e| match &e.record {
                    Record::Injected { fault: Fault::BatteryDrop { uav, .. } } => Some(uav),
                    _ => None,
                })
                .collect();
            for (id, b) in m.world().bodies() {
                let (battery, position) = before[id];
                let moved = position.distance(b.position);
                prop_assert!(moved <= b.spec.speed * m.world().dt() + TOL, "{} moved {} in one step", id, moved);
                if dropped.contains(&id) {
                    continue;
                }
                let e = m.world().last_energy(id).expect("energy of every body");
                let expected = battery - e.travel - e.hover + e.recharged;
                prop_assert!(
                    (b.battery - expected.max(0.0)).abs() < TOL,
                    "{} battery {} expected {} at step {}", id, b.battery, expected, k
                );
                prop_assert!(b.battery >= 0.0);
            }
        }
    }

    #[test]
    fn same_seed_same_log(seed in 0u64..100_000) {
        let s = short(common::faulty_scenario(seed));
        let run = || {
            let mut m = Mission::new(s.clone());
            m.run();
            m.log().iter().map(LogEntry::to_line).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn logs_reparse_and_replay(seed in 0u64..100_000) {
        let mut m = Mission::new(short(common::faulty_scenario(seed)));
        m.run();
        let lines: Vec<(String, LogEntry<f64>)> = m
            .log()
            .iter()
            .map(|e| {
                let l = e.to_line();
                let back: LogEntry<f64> = serde_json::from_str(&l).expect("parses");
                (l, back)
            })
            .collect();
        for (l, back) in &lines {
            prop_assert_eq!(&back.to_line(), l);
        }
        let r = replay(&lines).expect("replays");
        prop_assert!(r.complete, "diverged: {:?}", r.divergence);
        prop_assert_eq!(r.snapshot, m.snapshot());
    }

    #[test]
    fn mid_run_state_replays_from_its_log(seed in 0u64..100_000, stop in 1u64..4000) {
        let mut m = Mission::new(short(common::faulty_scenario(seed)));
        while m.ended().is_none() && m.world().step_index() < stop {
            m.step();
        }
        let lines: Vec<(String, LogEntry<f64>)> = m.log().iter().map(|e| (e.to_line(), e.clone())).collect();
        let r = replay_to(&lines, Some(m.world().step_index())).expect("replays");
        prop_assert_eq!(r.divergence, None);
        prop_assert_eq!(r.snapshot, m.snapshot());
    }
}

#[test]
fn initial_actions_can_be_modified_before_the_first_step() {
    use skycrew_core::domain::{ActionId, ActionParams, WorkerId};
    use skycrew_core::sim::Command;
    let mut m = Mission::new(common::fig4());
    let params = ActionParams::Monitor { worker: WorkerId::new("worker-1"), vehicles: 1, duration: 400.0 };
    let at = m.submit(None, Command::ModifyAction { action: ActionId::new("monitor-worker"), params }).unwrap();
    assert_eq!(at, 0);
    m.step();
    assert!(m.log().iter().any(|e| matches!(&e.record, Record::Event { .. }) && e.to_line().contains("action_params_modified")));
    assert!(!m.log().iter().any(|e| matches!(e.record, Record::Rejected { .. })));
}
