//! A small behavior-tree engine.
//!
//! Trees are built once from [`BtNode`] constructors and ticked against a
//! caller-owned blackboard `B`. Control nodes follow the classic
//! success/failure/running table:
//!
//! | node      | succeeds                  | fails                     | running            |
//! |-----------|---------------------------|---------------------------|--------------------|
//! | Fallback  | one child succeeds        | all children fail         | one child runs     |
//! | Sequence  | all children succeed      | one child fails           | one child runs     |
//! | Parallel  | `>= success_threshold` ok | `>= failure_threshold` ko | otherwise          |
//! | Action    | upon completion           | impossible to complete    | during completion  |
//! | Condition | predicate true            | predicate false           | never              |
//!
//! Plain `Sequence`/`Fallback` remember their running child and resume there
//! on the next tick. The `Reactive*` variants restart from the first child on
//! every tick and halt whatever was running further right when an earlier
//! child changes its answer.

mod node;
pub mod text;

pub use node::{
    ActionLeaf, BtNode, BuildError, Leaf, NodeKind, NodeStatus, ParallelPolicy, TraceEntry,
};
