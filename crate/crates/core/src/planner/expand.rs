use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::domain::{
    ActionParams, ActionRequest, Origin, Span, SyncGroupId, Target, Task, TaskId, TaskKind, Violation,
    Work, WorkerId,
};
use crate::geometry::Point3;
use crate::planner::{ActionQueue, PlannerConfig};
use crate::scalar::Scalar;

/// Standoff of monitoring vehicle `i` of `k` around its worker.
pub fn monitor_offset<S: Scalar>(i: u32, k: u32, cfg: &PlannerConfig<S>) -> Point3<S> {
    let angle = S::lit(TAU * f64::from(i) / f64::from(k.max(1)));
    Point3::new(cfg.monitor_radius * angle.cos(), cfg.monitor_radius * angle.sin(), cfg.monitor_altitude)
}

/// Turn one action into its logical tasks. A monitor needing `k` vehicles
/// becomes `k` sync-grouped tasks.
pub fn expand_action<S: Scalar>(
    a: &ActionRequest<S>,
    workers: &BTreeMap<WorkerId, Point3<S>>,
    cfg: &PlannerConfig<S>,
) -> Result<Vec<Task<S>>, Violation> {
    let base = |id: TaskId, kind: TaskKind, start: Point3<S>, work: Work<S>, span: Span<S>| Task {
        origin: Some(Origin { task: id.clone(), span }),
        id,
        source_action: Some(a.id.clone()),
        kind,
        start_location: start,
        work,
        required_capability: kind.required_capability(),
        divisible: matches!(kind, TaskKind::Inspect | TaskKind::Monitor),
        sync_group: None,
        weight: a.weight,
        arrival_time: a.arrival_time,
        target: None,
        not_before: None,
    };
    let worker_at = |w: &WorkerId| {
        workers.get(w).copied().ok_or_else(|| Violation::new(format!("action {}", a.id), format!("unknown worker {w}")))
    };
    Ok(match &a.params {
        ActionParams::Inspect { waypoints } => {
            let span = Span::Waypoints { indices: (0..waypoints.len()).collect() };
            vec![base(TaskId::new(a.id.as_str()), TaskKind::Inspect, waypoints[0], Work::Waypoints(waypoints.clone()), span)]
        }
        ActionParams::Monitor { worker, vehicles, duration } => {
            let at = worker_at(worker)?;
            let k = *vehicles;
            (0..k)
                .map(|i| {
                    let id = if k == 1 { TaskId::new(a.id.as_str()) } else { TaskId::new(format!("{}.{i}", a.id)) };
                    let offset = monitor_offset(i, k, cfg);
                    let mut t = base(
                        id,
                        TaskKind::Monitor,
                        at + offset,
                        Work::Duration(*duration),
                        Span::Coverage { from: S::zero(), to: *duration },
                    );
                    t.target = Some(Target { worker: Some(worker.clone()), tool: None, offset });
                    if k > 1 {
                        t.sync_group = Some(SyncGroupId::new(format!("sync/{}", a.id)));
                    }
                    t
                })
                .collect()
        }
        ActionParams::Deliver { tool, worker } => {
            let offset = Point3::new(S::zero(), S::zero(), cfg.delivery_altitude);
            let mut t = base(
                TaskId::new(a.id.as_str()),
                TaskKind::Deliver,
                worker_at(worker)? + offset,
                Work::Duration(cfg.delivery_handling),
                Span::Whole,
            );
            t.target = Some(Target { worker: Some(worker.clone()), tool: Some(tool.clone()), offset });
            vec![t]
        }
    })
}

/// Expand every queued action, in queue order. Actions naming an unknown
/// worker are skipped and reported.
pub fn expand_queue<S: Scalar>(
    queue: &ActionQueue<S>,
    workers: &BTreeMap<WorkerId, Point3<S>>,
    cfg: &PlannerConfig<S>,
) -> (Vec<Task<S>>, Vec<Violation>) {
    let mut tasks = Vec::new();
    let mut bad = Vec::new();
    for a in queue.iter() {
        match expand_action(a, workers, cfg) {
            Ok(ts) => tasks.extend(ts),
            Err(v) => bad.push(v),
        }
    }
    (tasks, bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monitor_expands_into_sync_group() {
        let workers = BTreeMap::from([(WorkerId::new("w"), Point3::new(10.0, 0.0, 0.0))]);
        let a = ActionRequest {
            id: "m".into(),
            weight: 1.0,
            arrival_time: 0.0,
            params: ActionParams::Monitor { worker: "w".into(), vehicles: 2, duration: 30.0 },
        };
        let ts = expand_action(&a, &workers, &PlannerConfig::default()).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].id.as_str(), "m.0");
        assert_eq!(ts[0].sync_group, ts[1].sync_group);
        assert!(ts[0].sync_group.is_some());
        assert!((ts[0].start_location.distance(ts[1].start_location) - 10.0_f64).abs() < 1e-9);
        assert!(ts.iter().all(|t| t.violations().is_empty() && t.divisible));
    }

    #[test]
    fn unknown_worker_is_a_violation() {
        let a = ActionRequest {
            id: "d".into(),
            weight: 1.0,
            arrival_time: 0.0,
            params: ActionParams::Deliver { tool: "t".into(), worker: "nobody".into() },
        };
        assert!(expand_action(&a, &BTreeMap::new(), &PlannerConfig::<f64>::default()).is_err());
    }
}
