use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{Fleet, Plan, SyncGroupId, Violation};
use crate::planner::timeline::{simulate_sequence, start_of};
use crate::planner::PlannerConfig;
use crate::scalar::Scalar;

fn close<S: Scalar>(a: S, b: S) -> bool {
    (a - b).abs() <= S::lit(1e-6) * (S::one() + a.abs().max(b.abs()))
}

/// Every rule a plan must satisfy: ordered intervals, estimates consistent
/// with the energy model, battery never under the reserve, every task end
/// within reach of the station, sync groups starting together. Empty when
/// the plan is feasible.
pub fn check_plan<S: Scalar>(plan: &Plan<S>, fleet: &Fleet<S>, cfg: &PlannerConfig<S>) -> Vec<Violation> {
    let _ = cfg;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut groups: BTreeMap<&SyncGroupId, Vec<S>> = BTreeMap::new();
    for (uav, entries) in &plan.assignments {
        let entity = format!("plan/{uav}");
        let Some((spec, start)) = start_of(fleet, uav, plan.created_at) else {
            out.push(Violation::new(entity, "vehicle not in fleet"));
            continue;
        };
        let reserve = spec.reserve();
        let tl = simulate_sequence(spec, start, entries.iter().map(|e| (&e.task, e.resume.as_ref())), reserve);
        if let Some(f) = tl.flag {
            out.push(Violation::new(&entity, format!("battery floor broken at entry {}", f.index())));
        }
        for (i, (e, s)) in entries.iter().zip(&tl.slots).enumerate() {
            let here = format!("{entity}[{i}] {}", e.task.id);
            if !seen.insert(&e.task.id) {
                out.push(Violation::new(&here, "task id repeated"));
            }
            out.extend(e.task.violations().into_iter().map(|v| Violation::new(&here, v.rule)));
            // Written so that NaN times fail too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(e.est_start <= e.est_end) {
                out.push(Violation::new(&here, "est_start <= est_end"));
            }
            if i + 1 < entries.len() && entries[i + 1].est_start < e.est_end - S::tol() {
                out.push(Violation::new(&here, "overlaps the next entry"));
            }
            if e.est_battery_at_start < reserve - S::tol() {
                out.push(Violation::new(&here, "battery at start below reserve"));
            }
            let consistent = close(e.est_start, s.start)
                && close(e.est_end, s.end)
                && close(e.est_battery_at_start, s.battery_start)
                && close(e.est_battery_at_end, s.battery_end);
            if !consistent {
                out.push(Violation::new(&here, "estimates disagree with the energy model"));
            }
            if let Some(g) = &e.task.sync_group {
                groups.entry(g).or_default().push(e.est_start);
            }
        }
    }
    for (g, starts) in groups {
        if starts.len() > 1 && starts.iter().any(|s| !close(*s, starts[0])) {
            out.push(Violation::new(format!("sync group {g}"), "members start together"));
        }
    }
    out
}
