//! Multi-UAV mission planning, behavior-tree agents and a deterministic
//! mission simulator.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases at the crate
//! root fix it to `f64`.

pub mod agent;
pub mod domain;
pub mod geometry;
pub mod planner;
pub mod protocol;
pub mod scalar;
pub mod scenario;
pub mod sim;

pub use scalar::Scalar;

pub type Point3 = geometry::Point3<f64>;
pub type Task = domain::Task<f64>;
pub type Plan = domain::Plan<f64>;
pub type PlanEntry = domain::PlanEntry<f64>;
pub type ActionRequest = domain::ActionRequest<f64>;
pub type UavSpec = domain::UavSpec<f64>;
pub type UavState = domain::UavState<f64>;
pub type Fleet = domain::Fleet<f64>;
pub type Event = domain::Event<f64>;
pub type PlannerConfig = planner::PlannerConfig<f64>;
pub type Planner = planner::Planner<f64>;
pub type ScenarioConfig = scenario::ScenarioConfig<f64>;
pub type Mission = sim::Mission<f64>;
pub type Snapshot = sim::Snapshot<f64>;
pub type LogEntry = sim::LogEntry<f64>;
