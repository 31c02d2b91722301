//! Deterministic co-simulation of the world, the bus, the planner and the agents.

mod bus;
mod log;
mod mission;
mod node;
mod replay;
mod snapshot;
mod world;

pub use bus::{Bus, Delivery};
pub use log::{read_log, write_log, Command, EndOutcome, LogEntry, LogError, Record};
pub use mission::{CommandError, Mission};
pub use node::{NodeOutput, PlannerNode};
pub use replay::{replay, replay_to, Divergence, ReplayError, ReplayReport};
pub use snapshot::{Snapshot, TaskView, VehicleView};
pub use world::{Body, LinkState, StepEnergy, World, WorldEvent};
