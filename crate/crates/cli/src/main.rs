use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skycrew_cli::{exit, replay_log, run, validate_file, RunOptions};
use skycrew_gateway::DEFAULT_PORT;

#[derive(Parser)]
#[command(name = "skycrew", version, about = "Run, replay and validate multi-UAV missions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write events.log, plan reports and gantt.svg.
    Run {
        file: PathBuf,
        /// Attach the HTTP/WebSocket gateway on localhost.
        #[arg(long)]
        serve: bool,
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated seconds per wall second; unthrottled if absent.
        #[arg(long)]
        speed: Option<f64>,
        /// Stop at this simulated time.
        #[arg(long)]
        until: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Keep the gateway up after the mission ends, until Ctrl-C.
        #[arg(long, requires = "serve")]
        hold: bool,
        /// Start paused; resume through the gateway.
        #[arg(long, requires = "serve")]
        paused: bool,
    },
    /// Re-run a log and check it reproduces line by line.
    Replay {
        log: PathBuf,
        /// Write the reconstructed snapshot here as JSON.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_target(false).init();
    let result = match Cli::parse().cmd {
        Cmd::Run { file, serve, port, seed, speed, until, out, hold, paused } => run(&RunOptions {
            scenario: file,
            out,
            seed,
            speed,
            until,
            serve: serve.then_some(port),
            hold,
            paused,
        }),
        Cmd::Replay { log, snapshot } => replay_log(&log, snapshot.as_deref()),
        Cmd::Validate { file } => Ok(validate_file(&file)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::FAULT)
        }
    }
}
