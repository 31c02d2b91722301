//! The `skycrew` command line: run scenarios, replay logs, validate files.
//!
//! Exit codes are [`exit::OK`], [`exit::INVALID`] for files that do not
//! parse or validate, and [`exit::FAULT`] for runs that time out, replays
//! that diverge and I/O failures.

pub mod gantt;
pub mod report;
mod run;

pub use run::{load_scenario, replay_log, run, validate_file, write_artifacts, LoadError, RunOptions};

pub mod exit {
    pub const OK: u8 = 0;
    pub const INVALID: u8 = 2;
    pub const FAULT: u8 = 3;
}
