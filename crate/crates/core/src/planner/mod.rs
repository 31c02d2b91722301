//! Centralized mission planner.
//!
//! Actions are expanded into tasks, allocated greedily in priority order to
//! the cheapest vehicle, then made battery-feasible by inserting recharges
//! (splitting divisible tasks when that keeps a vehicle working longer) and
//! synchronized with wait tasks.

mod allocate;
mod config;
mod cost;
mod energy;
mod expand;
mod feasibility;
mod queue;
mod recharge;
mod service;
mod split;
mod timeline;
mod waits;

pub use allocate::{allocate, plan_mission, Allocation, AssignmentStep, Bid, Committed, PlanningInput};
pub use config::{PlannerConfig, TypeCost};
pub use cost::{compute_cost, Bidder};
pub use energy::{at_station, estimate_energy, leg, return_energy, Leg};
pub use expand::{expand_action, expand_queue, monitor_offset};
pub use feasibility::check_plan;
pub use queue::{enqueue_action, ActionQueue, DuplicateId};
pub use recharge::insert_recharges;
pub use service::{Planner, FAILURE_CONTROLLER, PlannerError, Reaction, ReplanCause, TaskRecord};
pub use split::{piece_id, remainder};
pub use timeline::{simulate_plan, simulate_sequence, BatteryFlag, Slot, StartState, Timeline};
pub use waits::insert_waits;
