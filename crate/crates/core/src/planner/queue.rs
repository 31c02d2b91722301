use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ActionId, ActionRequest};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("action `{0}` is already queued")]
pub struct DuplicateId(pub ActionId);

/// Pending actions sorted by (weight, arrival time, id).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ActionQueue<S> {
    actions: Vec<ActionRequest<S>>,
}

impl<S: Scalar> ActionQueue<S> {
    pub fn new() -> Self {
        Self { actions: Vec::new() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionRequest<S>> {
        self.actions.iter()
    }

    pub fn get(&self, id: &ActionId) -> Option<&ActionRequest<S>> {
        self.actions.iter().find(|a| &a.id == id)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn insert(&mut self, a: ActionRequest<S>) -> Result<(), DuplicateId> {
        if self.get(&a.id).is_some() {
            return Err(DuplicateId(a.id));
        }
        let at = self.actions.partition_point(|x| x.queue_cmp(&a).is_le());
        self.actions.insert(at, a);
        Ok(())
    }

    /// Replace an action in place, keeping the queue sorted.
    pub fn replace(&mut self, a: ActionRequest<S>) -> Option<ActionRequest<S>> {
        let i = self.actions.iter().position(|x| x.id == a.id)?;
        let old = self.actions.remove(i);
        let at = self.actions.partition_point(|x| x.queue_cmp(&a).is_le());
        self.actions.insert(at, a);
        Some(old)
    }
}

pub fn enqueue_action<S: Scalar>(
    mut queue: ActionQueue<S>,
    a: ActionRequest<S>,
) -> Result<ActionQueue<S>, DuplicateId> {
    queue.insert(a)?;
    Ok(queue)
}
