use crate::domain::{CostBreakdown, Task, UavSpec};
use crate::geometry::Point3;
use crate::planner::PlannerConfig;
use crate::scalar::Scalar;

/// A vehicle as seen when bidding on a task.
#[derive(Clone, Debug)]
pub struct Bidder<'a, S> {
    pub spec: &'a UavSpec<S>,
    /// Where it is now.
    pub position: Point3<S>,
    /// Where it will be once its committed queue is done.
    pub projected: Point3<S>,
    /// Weight of the task it is running, if that task may be preempted.
    pub running_weight: Option<S>,
}

impl<'a, S: Scalar> Bidder<'a, S> {
    pub fn idle(spec: &'a UavSpec<S>, position: Point3<S>) -> Self {
        Self { spec, position, projected: position, running_weight: None }
    }

    /// True if taking `task` would interrupt the running task.
    pub fn preempts(&self, task: &Task<S>) -> bool {
        self.running_weight.is_some_and(|w| task.weight < w)
    }
}

pub fn compute_cost<S: Scalar>(b: &Bidder<'_, S>, task: &Task<S>, cfg: &PlannerConfig<S>) -> CostBreakdown<S> {
    if !b.spec.can(task.required_capability) {
        return CostBreakdown::infeasible();
    }
    let j1 = cfg.type_cost(&b.spec.capabilities, task.kind);
    let (from, j3) = match b.running_weight {
        Some(w) if task.weight < w => (b.position, cfg.interruption_weight * w),
        _ => (b.projected, S::zero()),
    };
    let j2 = cfg.travel_weight * from.distance(task.start_location);
    CostBreakdown::new(j1, j2, j3)
}
