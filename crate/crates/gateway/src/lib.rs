//! Live access to a running mission over HTTP and WebSocket.
//!
//! A [`Driver`] owns the mission on its own thread and steps it. Operator
//! commands reach it through a [`Handle`] and are applied at step
//! boundaries. Readers see an append-only copy of the log and the snapshot
//! published at the latest boundary; they never touch the mission itself.
//!
//! | endpoint            | method | body                                         |
//! |---------------------|--------|----------------------------------------------|
//! | `/snapshot?tail=N`  | GET    | [`api::SnapshotBody`]: status, snapshot, last N log entries |
//! | `/command`          | POST   | [`api::CommandRequest`] in, [`api::Ack`] or [`api::Rejection`] out |
//! | `/events?since=N`   | GET    | log entries from index N: WebSocket when upgraded, NDJSON otherwise |
//!
//! Over the WebSocket every log entry is one text frame. Client text frames
//! are parsed as commands and answered with an [`api::Reply`].

pub mod api;
mod driver;
mod server;

pub use driver::{Driver, DriverConfig, Handle, Head};
pub use server::{router, serve, DEFAULT_PORT};
