use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{Capability, TaskKind, Violation};
use crate::scalar::Scalar;

/// Type-affinity cost of a capability profile doing a task kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct TypeCost<S> {
    pub profile: BTreeSet<Capability>,
    pub task: TaskKind,
    pub cost: S,
}

fn zero<S: Scalar>() -> S {
    S::zero()
}

fn default_handling<S: Scalar>() -> S {
    S::lit(5.0)
}

fn default_standoff<S: Scalar>() -> S {
    S::lit(5.0)
}

fn default_delivery_altitude<S: Scalar>() -> S {
    S::lit(3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct PlannerConfig<S> {
    /// Missing entries cost 0; incapable vehicles are always infinite.
    #[serde(default)]
    pub type_cost_matrix: Vec<TypeCost<S>>,
    pub travel_weight: S,
    pub interruption_weight: S,
    /// Battery fraction under which a vehicle recharges before starting a new task. 0 disables.
    #[serde(default = "zero")]
    pub recharge_threshold: S,
    pub watchdog_timeout: S,
    pub recharge_duration: S,
    /// Hover time at the worker to hand over a tool.
    #[serde(default = "default_handling")]
    pub delivery_handling: S,
    /// Horizontal radius and height of monitoring positions around the worker.
    #[serde(default = "default_standoff")]
    pub monitor_radius: S,
    #[serde(default = "default_standoff")]
    pub monitor_altitude: S,
    #[serde(default = "default_delivery_altitude")]
    pub delivery_altitude: S,
    /// Energy kept on top of the reserve by both planner and agents.
    #[serde(default = "zero")]
    pub safety_margin: S,
}

impl<S: Scalar> Default for PlannerConfig<S> {
    fn default() -> Self {
        Self {
            type_cost_matrix: Vec::new(),
            travel_weight: S::one(),
            interruption_weight: S::one(),
            recharge_threshold: S::zero(),
            watchdog_timeout: S::lit(10.0),
            recharge_duration: S::lit(60.0),
            delivery_handling: default_handling(),
            monitor_radius: default_standoff(),
            monitor_altitude: default_standoff(),
            delivery_altitude: default_delivery_altitude(),
            safety_margin: S::zero(),
        }
    }
}

impl<S: Scalar> PlannerConfig<S> {
    pub fn type_cost(&self, profile: &BTreeSet<Capability>, task: TaskKind) -> S {
        self.type_cost_matrix
            .iter()
            .find(|t| t.task == task && &t.profile == profile)
            .map_or(S::zero(), |t| t.cost)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let e = "planner";
        let mut out = Vec::new();
        let nonneg = |v: S| v.is_finite() && v >= S::zero();
        if !(self.travel_weight.is_finite() && self.travel_weight > S::zero()) {
            out.push(Violation::new(e, "travel_weight > 0"));
        }
        if !nonneg(self.interruption_weight) {
            out.push(Violation::new(e, "interruption_weight >= 0"));
        }
        if !(nonneg(self.recharge_threshold) && self.recharge_threshold <= S::one()) {
            out.push(Violation::new(e, "recharge_threshold in [0, 1]"));
        }
        if !(self.watchdog_timeout.is_finite() && self.watchdog_timeout > S::zero()) {
            out.push(Violation::new(e, "watchdog_timeout > 0"));
        }
        for (name, v) in [
            ("recharge_duration", self.recharge_duration),
            ("delivery_handling", self.delivery_handling),
            ("monitor_radius", self.monitor_radius),
            ("monitor_altitude", self.monitor_altitude),
            ("delivery_altitude", self.delivery_altitude),
            ("safety_margin", self.safety_margin),
        ] {
            if !nonneg(v) {
                out.push(Violation::new(e, format!("{name} >= 0")));
            }
        }
        for t in &self.type_cost_matrix {
            if !nonneg(t.cost) {
                out.push(Violation::new(e, "type costs finite and >= 0"));
            }
        }
        out
    }
}
