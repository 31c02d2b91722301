mod common;

use common::reference::{exhaustive_conformance, RefNode, DECORATORS};
use proptest::prelude::*;
use skycrew_bt::{NodeKind, NodeStatus, ParallelPolicy};

#[test]
fn exhaustive_table_conformance() {
    let (cases, bad) = exhaustive_conformance();
    assert!(cases > 300, "only {cases} cases enumerated");
    assert!(bad.is_empty(), "{} disagreements:\n{}", bad.len(), bad.join("\n"));
}

#[test]
fn parallel_two_two_mixed_matches_reference() {
    let node = RefNode::Inner {
        name: "p".into(),
        kind: NodeKind::Parallel(ParallelPolicy::new(2, 2).unwrap()),
        children: common::reference::scripted_children(&[NodeStatus::Success, NodeStatus::Failure, NodeStatus::Running]),
    };
    assert_eq!(node.eval(&mut Vec::new()), NodeStatus::Running);
    assert_eq!(node.build().tick(&mut ()), NodeStatus::Running);
}

fn arb_status() -> impl Strategy<Value = NodeStatus> {
    prop_oneof![Just(NodeStatus::Success), Just(NodeStatus::Failure), Just(NodeStatus::Running)]
}

fn arb_tree() -> impl Strategy<Value = RefNode> {
    let leaf = prop_oneof![
        arb_status().prop_map(|s| RefNode::Action { name: String::new(), status: s }),
        any::<bool>().prop_map(|v| RefNode::Condition { name: String::new(), value: v }),
    ];
    leaf.prop_recursive(3, 40, 3, |inner| {
        prop_oneof![
            (0usize..4, prop::collection::vec(inner.clone(), 0..4)).prop_flat_map(|(k, kids)| {
                let n = kids.len();
                let kind = match k {
                    0 => Just(NodeKind::Sequence).boxed(),
                    1 => Just(NodeKind::ReactiveFallback).boxed(),
                    2 if n > 0 => (1..=n, 1..=n)
                        .prop_map(|(a, b)| NodeKind::Parallel(ParallelPolicy::new(a, b).unwrap()))
                        .boxed(),
                    _ => Just(NodeKind::Fallback).boxed(),
                };
                kind.prop_map(move |kind| RefNode::Inner { name: String::new(), kind, children: kids.clone() })
            }),
            (0usize..3, inner).prop_map(|(d, child)| RefNode::Inner {
                name: String::new(),
                kind: DECORATORS[d],
                children: vec![child],
            }),
        ]
    })
}

fn rename(node: &mut RefNode, next: &mut usize) {
    let fresh = format!("n{next}");
    *next += 1;
    match node {
        RefNode::Action { name, .. } | RefNode::Condition { name, .. } => *name = fresh,
        RefNode::Inner { name, children, .. } => {
            *name = fresh;
            for c in children {
                rename(c, next);
            }
        }
    }
}

proptest! {
    #[test]
    fn random_tree_trace_matches_reference(mut tree in arb_tree()) {
        rename(&mut tree, &mut 0);
        let mut expected = Vec::new();
        let status = tree.eval(&mut expected);
        let mut live = tree.build();
        let (got, trace) = live.tick_trace(&mut ());
        prop_assert_eq!(got, status);
        let got: Vec<_> = trace.into_iter().map(|e| (e.name, e.status)).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn tick_is_deterministic_for_fixed_leaves(mut tree in arb_tree()) {
        rename(&mut tree, &mut 0);
        let a = tree.build().tick_trace(&mut ());
        let b = tree.build().tick_trace(&mut ());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn conditions_never_run(value in any::<bool>()) {
        let node = RefNode::Condition { name: "c".into(), value };
        prop_assert_ne!(node.build().tick(&mut ()), NodeStatus::Running);
    }
}
