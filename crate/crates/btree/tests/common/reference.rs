//! Table-driven reference interpreter for a single tick of a fresh tree.
//!
//! Independent of the engine: composites are described by a per-child rule
//! table (continue or stop with a result) and decorators by a three-entry
//! mapping. Used as the oracle for conformance tests.

#![allow(dead_code)]

use skycrew_bt::{BtNode, Leaf, NodeKind, NodeStatus, ParallelPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Continue,
    Stop(NodeStatus),
}

/// Indexed by child status in [Success, Failure, Running] order.
pub type ChildRules = [Step; 3];

pub const SEQUENCE_RULES: (ChildRules, NodeStatus) = (
    [Step::Continue, Step::Stop(NodeStatus::Failure), Step::Stop(NodeStatus::Running)],
    NodeStatus::Success,
);

pub const FALLBACK_RULES: (ChildRules, NodeStatus) = (
    [Step::Stop(NodeStatus::Success), Step::Continue, Step::Stop(NodeStatus::Running)],
    NodeStatus::Failure,
);

pub const INVERTER_MAP: [NodeStatus; 3] = [NodeStatus::Failure, NodeStatus::Success, NodeStatus::Running];
pub const FORCE_RUNNING_MAP: [NodeStatus; 3] = [NodeStatus::Running; 3];
pub const FORCE_FAILURE_MAP: [NodeStatus; 3] = [NodeStatus::Failure, NodeStatus::Failure, NodeStatus::Running];

fn idx(s: NodeStatus) -> usize {
    match s {
        NodeStatus::Success => 0,
        NodeStatus::Failure => 1,
        NodeStatus::Running => 2,
    }
}

#[derive(Clone, Debug)]
pub enum RefNode {
    Action { name: String, status: NodeStatus },
    Condition { name: String, value: bool },
    Inner { name: String, kind: NodeKind, children: Vec<RefNode> },
}

impl RefNode {
    pub fn name(&self) -> &str {
        match self {
            RefNode::Action { name, .. } | RefNode::Condition { name, .. } | RefNode::Inner { name, .. } => name,
        }
    }

    /// Evaluate one tick, appending (name, status) for every visited node in pre-order.
    pub fn eval(&self, log: &mut Vec<(String, NodeStatus)>) -> NodeStatus {
        let slot = log.len();
        log.push((self.name().to_owned(), NodeStatus::Running));
        let status = match self {
            RefNode::Action { status, .. } => *status,
            RefNode::Condition { value, .. } => {
                if *value {
                    NodeStatus::Success
                } else {
                    NodeStatus::Failure
                }
            }
            RefNode::Inner { kind, children, .. } => match kind {
                NodeKind::Sequence | NodeKind::ReactiveSequence => run_rules(SEQUENCE_RULES, children, log),
                NodeKind::Fallback | NodeKind::ReactiveFallback => run_rules(FALLBACK_RULES, children, log),
                NodeKind::Parallel(p) => {
                    let results: Vec<_> = children.iter().map(|c| c.eval(log)).collect();
                    let ok = results.iter().filter(|s| **s == NodeStatus::Success).count();
                    let ko = results.iter().filter(|s| **s == NodeStatus::Failure).count();
                    if ok >= p.success_threshold() {
                        NodeStatus::Success
                    } else if ko >= p.failure_threshold() {
                        NodeStatus::Failure
                    } else {
                        NodeStatus::Running
                    }
                }
                NodeKind::Inverter => INVERTER_MAP[idx(children[0].eval(log))],
                NodeKind::ForceRunning => FORCE_RUNNING_MAP[idx(children[0].eval(log))],
                NodeKind::ForceFailure => FORCE_FAILURE_MAP[idx(children[0].eval(log))],
                NodeKind::Action | NodeKind::Condition => unreachable!(),
            },
        };
        log[slot].1 = status;
        status
    }

    /// Build the equivalent engine tree, with scripted leaves.
    pub fn build(&self) -> BtNode<()> {
        match self {
            RefNode::Action { name, status } => {
                let s = *status;
                BtNode::action(name.clone(), move |_: &mut ()| s)
            }
            RefNode::Condition { name, value } => {
                let v = *value;
                BtNode::condition(name.clone(), move |_: &()| v)
            }
            RefNode::Inner { name, kind, children } => {
                let kids = children.iter().map(RefNode::build).collect();
                BtNode::from_parts(name.clone(), *kind, kids, None::<Leaf<()>>).expect("well-formed")
            }
        }
    }
}

fn run_rules(
    (rules, exhausted): (ChildRules, NodeStatus),
    children: &[RefNode],
    log: &mut Vec<(String, NodeStatus)>,
) -> NodeStatus {
    for c in children {
        match rules[idx(c.eval(log))] {
            Step::Continue => {}
            Step::Stop(s) => return s,
        }
    }
    exhausted
}

pub fn composite_kinds(children: usize) -> Vec<NodeKind> {
    let mut kinds = vec![
        NodeKind::Sequence,
        NodeKind::ReactiveSequence,
        NodeKind::Fallback,
        NodeKind::ReactiveFallback,
    ];
    for ok in 1..=children {
        for ko in 1..=children.max(1) {
            kinds.push(NodeKind::Parallel(ParallelPolicy::new(ok, ko).unwrap()));
        }
    }
    kinds
}

pub const DECORATORS: [NodeKind; 3] = [NodeKind::Inverter, NodeKind::ForceRunning, NodeKind::ForceFailure];

/// All 3^k assignments of statuses to k children.
pub fn status_combinations(k: usize) -> Vec<Vec<NodeStatus>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                NodeStatus::ALL.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.push(*s);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn scripted_children(statuses: &[NodeStatus]) -> Vec<RefNode> {
    statuses
        .iter()
        .enumerate()
        .map(|(i, s)| RefNode::Action { name: format!("leaf{i}"), status: *s })
        .collect()
}

/// Every kind over every child-status combination with at most three
/// children. Returns (cases, disagreements).
pub fn exhaustive_conformance() -> (usize, Vec<String>) {
    let mut cases = 0;
    let mut bad = Vec::new();
    let mut check = |node: RefNode| {
        cases += 1;
        let mut expected_log = Vec::new();
        let expected = node.eval(&mut expected_log);
        let mut tree = node.build();
        let (got, trace) = tree.tick_trace(&mut ());
        let got_log: Vec<_> = trace.into_iter().map(|e| (e.name, e.status)).collect();
        if got != expected || got_log != expected_log {
            bad.push(format!("{node:?}: expected {expected} {expected_log:?}, got {got} {got_log:?}"));
        }
    };
    for k in 0..=3 {
        for kind in composite_kinds(k) {
            if matches!(kind, NodeKind::Parallel(_)) && k == 0 {
                continue;
            }
            for combo in status_combinations(k) {
                check(RefNode::Inner { name: "root".into(), kind, children: scripted_children(&combo) });
            }
        }
    }
    for kind in DECORATORS {
        for combo in status_combinations(1) {
            check(RefNode::Inner { name: "root".into(), kind, children: scripted_children(&combo) });
        }
    }
    for value in [true, false] {
        check(RefNode::Condition { name: "cond".into(), value });
    }
    for s in NodeStatus::ALL {
        check(RefNode::Action { name: "act".into(), status: s });
    }
    (cases, bad)
}
