//! Leaf behaviors. Actions drive the controller stubs through
//! [`Control`](super::Control); conditions only read the context.

use skycrew_bt::{ActionLeaf, BtNode, NodeStatus};

use super::context::{AgentContext, Motion, ToolOp};
use crate::domain::{TaskKind, TaskProgress};
use crate::geometry::Point3;
use crate::planner::at_station;
use crate::protocol::ReportBody;
use crate::scalar::Scalar;

pub type Ctx<S> = AgentContext<S>;
type Target<S> = fn(&Ctx<S>) -> Option<Point3<S>>;

/// `TaskFailed` reason for a controller failure.
pub const CONTROLLER: &str = crate::planner::FAILURE_CONTROLLER;

struct Act<S> {
    name: &'static str,
    /// Works on the head task: marks it active and may hit a controller failure.
    task_bound: bool,
    run: Box<dyn FnMut(&mut Ctx<S>) -> NodeStatus + Send>,
}

impl<S: Scalar> ActionLeaf<Ctx<S>> for Act<S> {
    fn tick(&mut self, ctx: &mut Ctx<S>) -> NodeStatus {
        if self.task_bound {
            ctx.working = true;
            if ctx.take_fault() {
                return NodeStatus::Failure;
            }
        }
        (self.run)(ctx)
    }

    fn halt(&mut self, ctx: &mut Ctx<S>) {
        ctx.halted.push(self.name.to_owned());
        ctx.control.motion = Motion::Hold;
    }
}

fn action<S: Scalar>(
    name: &'static str,
    task_bound: bool,
    run: impl FnMut(&mut Ctx<S>) -> NodeStatus + Send + 'static,
) -> BtNode<Ctx<S>> {
    BtNode::action(name, Act { name, task_bound, run: Box::new(run) })
}

pub fn condition<S: Scalar>(name: &'static str, pred: fn(&Ctx<S>) -> bool) -> BtNode<Ctx<S>> {
    BtNode::condition(name, pred)
}

/// Fly towards a target until within the near distance.
pub fn go_near<S: Scalar>(name: &'static str, task_bound: bool, target: Target<S>) -> BtNode<Ctx<S>> {
    action(name, task_bound, move |ctx| match target(ctx) {
        None => NodeStatus::Failure,
        Some(p) if ctx.is_near(p) => NodeStatus::Success,
        Some(p) => {
            ctx.control.motion = Motion::FlyTo(p);
            NodeStatus::Running
        }
    })
}

/// A near-target guard: `Fallback[Condition "Is Agent near X?", Action "Go near X"]`.
pub fn near_guard<S: Scalar>(
    fallback: &'static str,
    cond: &'static str,
    act: &'static str,
    task_bound: bool,
    target: Target<S>,
    pred: fn(&Ctx<S>) -> bool,
) -> BtNode<Ctx<S>> {
    BtNode::fallback(fallback, vec![condition(cond, pred), go_near(act, task_bound, target)])
}

pub fn station<S: Scalar>(ctx: &Ctx<S>) -> Option<Point3<S>> {
    Some(ctx.spec.station)
}

pub fn human<S: Scalar>(ctx: &Ctx<S>) -> Option<Point3<S>> {
    ctx.human_target()
}

pub fn waypoint<S: Scalar>(ctx: &Ctx<S>) -> Option<Point3<S>> {
    ctx.next_waypoint()
}

pub fn wait_spot<S: Scalar>(ctx: &Ctx<S>) -> Option<Point3<S>> {
    ctx.head().filter(|t| t.kind == TaskKind::Wait).map(|t| t.start_location)
}

pub fn near_station<S: Scalar>(ctx: &Ctx<S>) -> bool {
    ctx.is_near(ctx.spec.station)
}

pub fn near_human<S: Scalar>(ctx: &Ctx<S>) -> bool {
    human(ctx).is_some_and(|p| ctx.is_near(p))
}

pub fn near_waypoint<S: Scalar>(ctx: &Ctx<S>) -> bool {
    waypoint(ctx).is_some_and(|p| ctx.is_near(p))
}

pub fn near_wait_spot<S: Scalar>(ctx: &Ctx<S>) -> bool {
    wait_spot(ctx).is_some_and(|p| ctx.is_near(p))
}

fn elapsed<S: Scalar>(ctx: &Ctx<S>) -> S {
    match ctx.progress {
        Some(TaskProgress::Hold { elapsed }) => elapsed,
        _ => S::zero(),
    }
}

/// Hold for the head task's duration once at `spot`: landed on the station,
/// hovering elsewhere.
fn hold<S: Scalar>(ctx: &mut Ctx<S>, spot: Point3<S>) -> NodeStatus {
    let Some(t) = ctx.head() else { return NodeStatus::Failure };
    let duration = t.hold_duration();
    let done = elapsed(ctx);
    if done >= duration - S::lit(1e-9) {
        return NodeStatus::Success;
    }
    if !ctx.is_near(spot) {
        ctx.control.motion = Motion::FlyTo(spot);
        return NodeStatus::Running;
    }
    ctx.control.motion = if at_station(&ctx.spec, spot) && ctx.at(spot) { Motion::Land } else { Motion::FlyTo(spot) };
    ctx.progress = Some(TaskProgress::Hold { elapsed: done + ctx.cfg.tick_period });
    NodeStatus::Running
}

pub fn inspection<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Inspection", true, |ctx| {
        let Some(t) = ctx.head() else { return NodeStatus::Failure };
        let wps = t.waypoints().to_vec();
        let mut next = match ctx.progress {
            Some(TaskProgress::Inspect { next_waypoint }) => next_waypoint,
            _ => 0,
        };
        while next < wps.len() && ctx.is_near(wps[next]) {
            next += 1;
        }
        ctx.progress = Some(TaskProgress::Inspect { next_waypoint: next });
        match wps.get(next) {
            None => NodeStatus::Success,
            Some(p) => {
                ctx.control.motion = Motion::FlyTo(*p);
                NodeStatus::Running
            }
        }
    })
}

pub fn monitoring<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Monitoring", true, |ctx| match ctx.human_target() {
        None => NodeStatus::Failure,
        Some(p) => hold(ctx, p),
    })
}

pub fn wait<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Wait", true, |ctx| match wait_spot(ctx) {
        None => NodeStatus::Failure,
        Some(p) => hold(ctx, p),
    })
}

pub fn pick_tool<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Pick Tool", true, |ctx| {
        let Some(tool) = ctx.head().and_then(|t| t.target.as_ref()).and_then(|t| t.tool.clone()) else {
            return NodeStatus::Failure;
        };
        ctx.control.tool = Some(ToolOp::Pick(tool.clone()));
        ctx.sensors.carried_tool = Some(tool);
        ctx.progress = Some(TaskProgress::Deliver { picked: true });
        NodeStatus::Success
    })
}

pub fn deliver_tool<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Deliver Tool", true, |ctx| {
        let (Some(t), Some(p)) = (ctx.head(), ctx.human_target()) else { return NodeStatus::Failure };
        let handling = t.hold_duration();
        ctx.control.motion = Motion::FlyTo(p);
        if ctx.handling >= handling - S::lit(1e-9) {
            ctx.control.tool = Some(ToolOp::Release);
            ctx.sensors.carried_tool = None;
            return NodeStatus::Success;
        }
        if ctx.is_near(p) {
            ctx.handling += ctx.cfg.tick_period;
        }
        NodeStatus::Running
    })
}

pub fn drop_tool<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Drop Tool", false, |ctx| {
        ctx.control.tool = Some(ToolOp::Drop);
        ctx.sensors.carried_tool = None;
        NodeStatus::Success
    })
}

/// Land on the station and swap the battery.
pub fn recharge<S: Scalar>(task_bound: bool) -> BtNode<Ctx<S>> {
    action("Recharge", task_bound, |ctx| {
        let st = ctx.spec.station;
        if !ctx.at(st) {
            ctx.control.motion = Motion::FlyTo(st);
            return NodeStatus::Running;
        }
        if ctx.sensors.battery >= ctx.spec.battery_capacity - S::tol() {
            return NodeStatus::Success;
        }
        ctx.control.motion = Motion::Land;
        ctx.control.recharge = true;
        NodeStatus::Running
    })
}

pub fn back_to_station<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Back To Station", false, |ctx| {
        let st = ctx.spec.station;
        if !ctx.at(st) {
            ctx.control.motion = Motion::FlyTo(st);
            return NodeStatus::Running;
        }
        ctx.control.motion = Motion::Land;
        if ctx.sensors.landed {
            NodeStatus::Success
        } else {
            NodeStatus::Running
        }
    })
}

pub fn report_done<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Report Task Done", false, |ctx| match ctx.finish_head() {
        None => NodeStatus::Failure,
        Some(t) => {
            ctx.report(ReportBody::TaskOutcome { task: t.id, success: true, reason: None });
            NodeStatus::Success
        }
    })
}

pub fn report_failed<S: Scalar>() -> BtNode<Ctx<S>> {
    action("Report Task Failed", false, |ctx| match ctx.finish_head() {
        None => NodeStatus::Failure,
        Some(t) => {
            ctx.report(ReportBody::TaskOutcome { task: t.id, success: false, reason: Some(CONTROLLER.into()) });
            NodeStatus::Success
        }
    })
}
