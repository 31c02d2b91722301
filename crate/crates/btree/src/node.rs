use std::fmt;

use thiserror::Error;

/// Result of ticking a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NodeStatus {
    Success,
    Failure,
    Running,
}

impl NodeStatus {
    pub const ALL: [NodeStatus; 3] = [NodeStatus::Success, NodeStatus::Failure, NodeStatus::Running];

    pub fn is_done(self) -> bool {
        self != NodeStatus::Running
    }
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeStatus::Success => "Success",
            NodeStatus::Failure => "Failure",
            NodeStatus::Running => "Running",
        })
    }
}

/// Success/failure thresholds of a parallel node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParallelPolicy {
    success_threshold: usize,
    failure_threshold: usize,
}

impl ParallelPolicy {
    pub fn new(success_threshold: usize, failure_threshold: usize) -> Result<Self, BuildError> {
        if success_threshold == 0 || failure_threshold == 0 {
            return Err(BuildError::ZeroThreshold);
        }
        Ok(Self { success_threshold, failure_threshold })
    }

    pub fn success_threshold(&self) -> usize {
        self.success_threshold
    }

    pub fn failure_threshold(&self) -> usize {
        self.failure_threshold
    }
}

/// Structural kind of a node, independent of its behavior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Sequence,
    ReactiveSequence,
    Fallback,
    ReactiveFallback,
    Parallel(ParallelPolicy),
    Inverter,
    ForceRunning,
    ForceFailure,
    Action,
    Condition,
}

impl NodeKind {
    pub fn is_composite(self) -> bool {
        matches!(
            self,
            NodeKind::Sequence
                | NodeKind::ReactiveSequence
                | NodeKind::Fallback
                | NodeKind::ReactiveFallback
                | NodeKind::Parallel(_)
        )
    }

    pub fn is_decorator(self) -> bool {
        matches!(self, NodeKind::Inverter | NodeKind::ForceRunning | NodeKind::ForceFailure)
    }

    pub fn is_leaf(self) -> bool {
        matches!(self, NodeKind::Action | NodeKind::Condition)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("decorator `{name}` needs exactly one child, got {found}")]
    DecoratorArity { name: String, found: usize },
    #[error("leaf `{name}` cannot have children")]
    LeafWithChildren { name: String },
    #[error("leaf `{name}` has no behavior bound")]
    MissingBehavior { name: String },
    #[error("node `{name}` of kind {kind:?} does not take a behavior")]
    UnexpectedBehavior { name: String, kind: NodeKind },
    #[error("behavior bound to `{name}` does not match its kind {kind:?}")]
    BehaviorMismatch { name: String, kind: NodeKind },
    #[error("parallel thresholds must be positive")]
    ZeroThreshold,
    #[error("parallel `{name}`: success threshold {threshold} exceeds {children} children")]
    ThresholdExceedsChildren { name: String, threshold: usize, children: usize },
}

/// Behavior of an action leaf.
///
/// `halt` is called when a running action is preempted by its ancestors.
pub trait ActionLeaf<B> {
    fn tick(&mut self, bb: &mut B) -> NodeStatus;

    fn halt(&mut self, _bb: &mut B) {}
}

impl<B, F> ActionLeaf<B> for F
where
    F: FnMut(&mut B) -> NodeStatus,
{
    fn tick(&mut self, bb: &mut B) -> NodeStatus {
        self(bb)
    }
}

type BoxedAction<B> = Box<dyn ActionLeaf<B> + Send>;
type BoxedCondition<B> = Box<dyn Fn(&B) -> bool + Send>;

/// Behavior bound to a leaf.
pub enum Leaf<B> {
    Action(BoxedAction<B>),
    Condition(BoxedCondition<B>),
}

impl<B> Leaf<B> {
    pub fn action(a: impl ActionLeaf<B> + Send + 'static) -> Self {
        Leaf::Action(Box::new(a))
    }

    pub fn condition(c: impl Fn(&B) -> bool + Send + 'static) -> Self {
        Leaf::Condition(Box::new(c))
    }
}

/// One visited node in a traced tick, in pre-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub name: String,
    pub kind: NodeKind,
    pub depth: usize,
    pub status: NodeStatus,
}

enum Body<B> {
    Composite { children: Vec<BtNode<B>>, cursor: usize },
    Decorator { child: Box<BtNode<B>> },
    Action(BoxedAction<B>),
    Condition(BoxedCondition<B>),
}

/// A behavior-tree node owning its subtree.
pub struct BtNode<B> {
    name: String,
    kind: NodeKind,
    body: Body<B>,
    last: Option<NodeStatus>,
}

impl<B> fmt::Debug for BtNode<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BtNode")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("children", &self.children().collect::<Vec<_>>())
            .finish()
    }
}

struct Tracer<'a> {
    log: Option<&'a mut Vec<TraceEntry>>,
    depth: usize,
}

impl<B> BtNode<B> {
    /// Generic constructor; validates arity and leaf binding.
    pub fn from_parts(
        name: impl Into<String>,
        kind: NodeKind,
        children: Vec<BtNode<B>>,
        leaf: Option<Leaf<B>>,
    ) -> Result<Self, BuildError> {
        let name = name.into();
        let body = if kind.is_leaf() {
            if !children.is_empty() {
                return Err(BuildError::LeafWithChildren { name });
            }
            match (kind, leaf) {
                (_, None) => return Err(BuildError::MissingBehavior { name }),
                (NodeKind::Action, Some(Leaf::Action(a))) => Body::Action(a),
                (NodeKind::Condition, Some(Leaf::Condition(c))) => Body::Condition(c),
                _ => return Err(BuildError::BehaviorMismatch { name, kind }),
            }
        } else {
            if leaf.is_some() {
                return Err(BuildError::UnexpectedBehavior { name, kind });
            }
            if kind.is_decorator() {
                let found = children.len();
                let mut children = children;
                match children.pop() {
                    Some(child) if found == 1 => Body::Decorator { child: Box::new(child) },
                    _ => return Err(BuildError::DecoratorArity { name, found }),
                }
            } else {
                if let NodeKind::Parallel(policy) = kind {
                    if policy.success_threshold > children.len() {
                        return Err(BuildError::ThresholdExceedsChildren {
                            name,
                            threshold: policy.success_threshold,
                            children: children.len(),
                        });
                    }
                }
                Body::Composite { children, cursor: 0 }
            }
        };
        Ok(Self { name, kind, body, last: None })
    }

    fn composite(name: impl Into<String>, kind: NodeKind, children: Vec<BtNode<B>>) -> Self {
        Self {
            name: name.into(),
            kind,
            body: Body::Composite { children, cursor: 0 },
            last: None,
        }
    }

    fn decorator(name: impl Into<String>, kind: NodeKind, child: BtNode<B>) -> Self {
        Self {
            name: name.into(),
            kind,
            body: Body::Decorator { child: Box::new(child) },
            last: None,
        }
    }

    pub fn sequence(name: impl Into<String>, children: Vec<BtNode<B>>) -> Self {
        Self::composite(name, NodeKind::Sequence, children)
    }

    pub fn reactive_sequence(name: impl Into<String>, children: Vec<BtNode<B>>) -> Self {
        Self::composite(name, NodeKind::ReactiveSequence, children)
    }

    pub fn fallback(name: impl Into<String>, children: Vec<BtNode<B>>) -> Self {
        Self::composite(name, NodeKind::Fallback, children)
    }

    pub fn reactive_fallback(name: impl Into<String>, children: Vec<BtNode<B>>) -> Self {
        Self::composite(name, NodeKind::ReactiveFallback, children)
    }

    pub fn parallel(
        name: impl Into<String>,
        policy: ParallelPolicy,
        children: Vec<BtNode<B>>,
    ) -> Result<Self, BuildError> {
        Self::from_parts(name, NodeKind::Parallel(policy), children, None)
    }

    pub fn inverter(name: impl Into<String>, child: BtNode<B>) -> Self {
        Self::decorator(name, NodeKind::Inverter, child)
    }

    pub fn force_running(name: impl Into<String>, child: BtNode<B>) -> Self {
        Self::decorator(name, NodeKind::ForceRunning, child)
    }

    pub fn force_failure(name: impl Into<String>, child: BtNode<B>) -> Self {
        Self::decorator(name, NodeKind::ForceFailure, child)
    }

    pub fn action(name: impl Into<String>, action: impl ActionLeaf<B> + Send + 'static) -> Self {
        Self {
            name: name.into(),
            kind: NodeKind::Action,
            body: Body::Action(Box::new(action)),
            last: None,
        }
    }

    pub fn condition(name: impl Into<String>, pred: impl Fn(&B) -> bool + Send + 'static) -> Self {
        Self {
            name: name.into(),
            kind: NodeKind::Condition,
            body: Body::Condition(Box::new(pred)),
            last: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    /// Status returned by the last tick, `None` if never ticked or halted since.
    pub fn last_status(&self) -> Option<NodeStatus> {
        self.last
    }

    pub fn children(&self) -> impl Iterator<Item = &BtNode<B>> {
        let slice: &[BtNode<B>] = match &self.body {
            Body::Composite { children, .. } => children,
            Body::Decorator { child } => std::slice::from_ref(child.as_ref()),
            Body::Action(_) | Body::Condition(_) => &[],
        };
        slice.iter()
    }

    /// Depth-first search by name.
    pub fn find(&self, name: &str) -> Option<&BtNode<B>> {
        if self.name == name {
            return Some(self);
        }
        self.children().find_map(|c| c.find(name))
    }

    /// Names of action leaves currently in the running state, in tree order.
    pub fn running_actions(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_running(&mut out);
        out
    }

    fn collect_running<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.kind == NodeKind::Action && self.last == Some(NodeStatus::Running) {
            out.push(&self.name);
        }
        for c in self.children() {
            c.collect_running(out);
        }
    }

    pub fn tick(&mut self, bb: &mut B) -> NodeStatus {
        self.tick_with(bb, &mut Tracer { log: None, depth: 0 })
    }

    /// Tick and record every visited node with its returned status.
    pub fn tick_trace(&mut self, bb: &mut B) -> (NodeStatus, Vec<TraceEntry>) {
        let mut log = Vec::new();
        let status = self.tick_with(bb, &mut Tracer { log: Some(&mut log), depth: 0 });
        (status, log)
    }

    /// Halt this subtree: running actions get notified and memory is cleared.
    pub fn halt(&mut self, bb: &mut B) {
        let was_running = self.last == Some(NodeStatus::Running);
        match &mut self.body {
            Body::Composite { children, cursor } => {
                *cursor = 0;
                for c in children.iter_mut() {
                    c.halt(bb);
                }
            }
            Body::Decorator { child } => child.halt(bb),
            Body::Action(a) => {
                if was_running {
                    a.halt(bb);
                }
            }
            Body::Condition(_) => {}
        }
        self.last = None;
    }

    fn tick_with(&mut self, bb: &mut B, tracer: &mut Tracer<'_>) -> NodeStatus {
        let slot = tracer.log.as_mut().map(|log| {
            log.push(TraceEntry {
                name: self.name.clone(),
                kind: self.kind,
                depth: tracer.depth,
                status: NodeStatus::Running,
            });
            log.len() - 1
        });
        tracer.depth += 1;
        let status = match (&mut self.body, self.kind) {
            (Body::Composite { children, cursor }, NodeKind::Sequence) => {
                tick_memory(children, cursor, bb, tracer, NodeStatus::Success)
            }
            (Body::Composite { children, cursor }, NodeKind::Fallback) => {
                tick_memory(children, cursor, bb, tracer, NodeStatus::Failure)
            }
            (Body::Composite { children, .. }, NodeKind::ReactiveSequence) => {
                tick_reactive(children, bb, tracer, NodeStatus::Success)
            }
            (Body::Composite { children, .. }, NodeKind::ReactiveFallback) => {
                tick_reactive(children, bb, tracer, NodeStatus::Failure)
            }
            (Body::Composite { children, .. }, NodeKind::Parallel(policy)) => {
                tick_parallel(children, policy, bb, tracer)
            }
            (Body::Decorator { child }, NodeKind::Inverter) => match child.tick_with(bb, tracer) {
                NodeStatus::Success => NodeStatus::Failure,
                NodeStatus::Failure => NodeStatus::Success,
                NodeStatus::Running => NodeStatus::Running,
            },
            (Body::Decorator { child }, NodeKind::ForceRunning) => {
                child.tick_with(bb, tracer);
                NodeStatus::Running
            }
            (Body::Decorator { child }, NodeKind::ForceFailure) => match child.tick_with(bb, tracer) {
                NodeStatus::Running => NodeStatus::Running,
                NodeStatus::Success | NodeStatus::Failure => NodeStatus::Failure,
            },
            (Body::Action(a), _) => a.tick(bb),
            (Body::Condition(c), _) => {
                if c(bb) {
                    NodeStatus::Success
                } else {
                    NodeStatus::Failure
                }
            }
            _ => unreachable!("body/kind mismatch is rejected at construction"),
        };
        tracer.depth -= 1;
        if let (Some(i), Some(log)) = (slot, tracer.log.as_mut()) {
            log[i].status = status;
        }
        self.last = Some(status);
        status
    }
}

/// `carry_on` is the status that moves evaluation to the next child:
/// Success for sequences, Failure for fallbacks.
fn tick_memory<B>(
    children: &mut [BtNode<B>],
    cursor: &mut usize,
    bb: &mut B,
    tracer: &mut Tracer<'_>,
    carry_on: NodeStatus,
) -> NodeStatus {
    let start = (*cursor).min(children.len());
    for i in start..children.len() {
        let s = children[i].tick_with(bb, tracer);
        if s == carry_on {
            continue;
        }
        if s == NodeStatus::Running {
            *cursor = i;
        } else {
            *cursor = 0;
            halt_all(children, bb);
        }
        return s;
    }
    *cursor = 0;
    carry_on
}

fn tick_reactive<B>(
    children: &mut [BtNode<B>],
    bb: &mut B,
    tracer: &mut Tracer<'_>,
    carry_on: NodeStatus,
) -> NodeStatus {
    for i in 0..children.len() {
        let s = children[i].tick_with(bb, tracer);
        if s != carry_on {
            halt_all(&mut children[i + 1..], bb);
            return s;
        }
    }
    carry_on
}

fn tick_parallel<B>(
    children: &mut [BtNode<B>],
    policy: ParallelPolicy,
    bb: &mut B,
    tracer: &mut Tracer<'_>,
) -> NodeStatus {
    let mut ok = 0;
    let mut ko = 0;
    for c in children.iter_mut() {
        match c.tick_with(bb, tracer) {
            NodeStatus::Success => ok += 1,
            NodeStatus::Failure => ko += 1,
            NodeStatus::Running => {}
        }
    }
    let status = if ok >= policy.success_threshold {
        NodeStatus::Success
    } else if ko >= policy.failure_threshold {
        NodeStatus::Failure
    } else {
        NodeStatus::Running
    };
    if status.is_done() {
        halt_all(children, bb);
    }
    status
}

fn halt_all<B>(children: &mut [BtNode<B>], bb: &mut B) {
    for c in children.iter_mut() {
        if c.last == Some(NodeStatus::Running) {
            c.halt(bb);
        }
    }
}
