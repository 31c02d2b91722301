//! The Main Tree and its subtrees.

use skycrew_bt::BtNode;

use super::actions::*;
use crate::domain::TaskKind;
use crate::scalar::Scalar;

pub fn drop_tool_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::reactive_sequence(
        "Drop Tool Tree",
        vec![
            condition("Need to Drop the Tool?", |c: &Ctx<S>| {
                let needed = c.head().and_then(|t| t.target.as_ref()).and_then(|t| t.tool.as_ref());
                c.sensors.carried_tool.is_some() && c.sensors.carried_tool.as_ref() != needed
            }),
            BtNode::sequence(
                "Drop Tool Sequence",
                vec![
                    near_guard("Station Fallback", "Is Agent near Station?", "Go near Station", false, station, near_station),
                    drop_tool(),
                ],
            ),
        ],
    )
}

/// `task_bound` is set for the copy that runs planned Recharge tasks.
pub fn recharge_tree<S: Scalar>(task_bound: bool) -> BtNode<Ctx<S>> {
    BtNode::reactive_sequence(
        "Recharge Tree",
        vec![
            near_guard(
                "Charging Station Fallback",
                "Is Agent near Charging Station?",
                "Go near Charging Station",
                task_bound,
                station,
                near_station,
            ),
            recharge(task_bound),
        ],
    )
}

pub fn monitoring_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::sequence(
        "Monitoring Task Tree",
        vec![
            near_guard("Human Target Fallback", "Is Agent near Human Target?", "Go near Human Target", true, human, near_human),
            monitoring(),
        ],
    )
}

pub fn inspection_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::sequence(
        "Inspection Task Tree",
        vec![near_guard("WP Fallback", "Is Agent near WP?", "Go near WP", true, waypoint, near_waypoint), inspection()],
    )
}

pub fn delivery_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::reactive_sequence(
        "Tool Delivery Task Tree",
        vec![
            BtNode::reactive_fallback(
                "Tool Fallback",
                vec![
                    condition("Has Agent the Tool?", |c: &Ctx<S>| {
                        let needed = c.head().and_then(|t| t.target.as_ref()).and_then(|t| t.tool.as_ref());
                        needed.is_some() && c.sensors.carried_tool.as_ref() == needed
                    }),
                    BtNode::sequence(
                        "Pick Tool Sequence",
                        vec![
                            near_guard("Station Fallback", "Is Agent near Station?", "Go near Station", true, station, near_station),
                            pick_tool(),
                        ],
                    ),
                ],
            ),
            near_guard("Human Target Fallback", "Is Agent near Human Target?", "Go near Human Target", true, human, near_human),
            deliver_tool(),
        ],
    )
}

fn wait_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::sequence(
        "Wait Task Tree",
        vec![near_guard("Wait Spot Fallback", "Is Agent near Wait Spot?", "Go near Wait Spot", true, wait_spot, near_wait_spot), wait()],
    )
}

fn branch<S: Scalar>(name: &'static str, cond: &'static str, kind: TaskKind, tree: BtNode<Ctx<S>>) -> BtNode<Ctx<S>> {
    let pred: fn(&Ctx<S>) -> bool = match kind {
        TaskKind::Inspect => |c| c.head_kind() == Some(TaskKind::Inspect),
        TaskKind::Monitor => |c| c.head_kind() == Some(TaskKind::Monitor),
        TaskKind::Deliver => |c| c.head_kind() == Some(TaskKind::Deliver),
        TaskKind::Recharge => |c| c.head_kind() == Some(TaskKind::Recharge),
        TaskKind::Wait => |c| c.head_kind() == Some(TaskKind::Wait),
    };
    BtNode::reactive_sequence(name, vec![condition(cond, pred), tree])
}

/// Runs the head of the queue and reports its outcome.
pub fn perform_task_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::fallback(
        "Perform Task Tree",
        vec![
            BtNode::sequence(
                "Execute Task",
                vec![
                    BtNode::reactive_fallback(
                        "Task Dispatch",
                        vec![
                            branch("Inspection Branch", "Is Inspection Task?", TaskKind::Inspect, inspection_tree()),
                            branch("Monitoring Branch", "Is Monitoring Task?", TaskKind::Monitor, monitoring_tree()),
                            branch("Delivery Branch", "Is Delivery Task?", TaskKind::Deliver, delivery_tree()),
                            branch("Recharge Branch", "Is Recharge Task?", TaskKind::Recharge, recharge_tree(true)),
                            branch("Wait Branch", "Is Wait Task?", TaskKind::Wait, wait_tree()),
                        ],
                    ),
                    report_done(),
                ],
            ),
            BtNode::force_failure("Task Failed", report_failed()),
        ],
    )
}

/// The Main Tree: mission-over branch, then the battery-gated task branch,
/// then recharging whenever nothing else applies.
pub fn main_tree<S: Scalar>() -> BtNode<Ctx<S>> {
    BtNode::reactive_fallback(
        "Main Tree",
        vec![
            BtNode::reactive_sequence(
                "Mission Over Sequence",
                vec![condition("Mission Over?", |c: &Ctx<S>| c.mission_over), back_to_station()],
            ),
            BtNode::force_running(
                "Force Running",
                BtNode::reactive_fallback(
                    "Mission Fallback",
                    vec![
                        BtNode::reactive_sequence(
                            "Battery Enough Sequence",
                            vec![
                                condition("Is Battery Enough?", |c: &Ctx<S>| c.battery_enough()),
                                BtNode::reactive_fallback(
                                    "Drop Tool Fallback",
                                    vec![
                                        BtNode::force_failure("Force Failure", drop_tool_tree()),
                                        BtNode::reactive_sequence(
                                            "Task Sequence",
                                            vec![
                                                BtNode::inverter(
                                                    "Inverter",
                                                    condition("Idle?", |c: &Ctx<S>| c.queue.is_empty()),
                                                ),
                                                perform_task_tree(),
                                            ],
                                        ),
                                    ],
                                ),
                            ],
                        ),
                        BtNode::reactive_fallback(
                            "Wait Fallback",
                            vec![condition("Is Battery Full?", |c: &Ctx<S>| c.battery_full()), recharge_tree(false)],
                        ),
                    ],
                ),
            ),
        ],
    )
}
