//! The thread that owns and steps the mission.

use std::sync::mpsc::{self, RecvTimeoutError, TryRecvError};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use skycrew_core::sim::EndOutcome;
use skycrew_core::{Mission, Snapshot};
use tokio::sync::{oneshot, watch};

use crate::api::{Ack, CommandRequest, GatewayCommand, Rejection, Status};

/// How often an idle driver looks for commands.
const IDLE_POLL: Duration = Duration::from_millis(20);
/// Minimum wall time between snapshots of an unthrottled run.
const PUBLISH_EVERY: Duration = Duration::from_millis(20);
/// A throttled run that falls further behind than this stops catching up.
const MAX_LAG: Duration = Duration::from_millis(250);

#[derive(Clone, Debug)]
pub struct DriverConfig {
    /// Simulated seconds per wall second; `None` steps as fast as possible.
    pub speed: Option<f64>,
    pub paused: bool,
    /// Stop the mission at this simulated time.
    pub until: Option<f64>,
    /// Exit the driver thread once the mission ends. Otherwise it keeps
    /// answering commands until shut down.
    pub stop_at_end: bool,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self { speed: None, paused: false, until: None, stop_at_end: true }
    }
}

/// Log length, and whether the log is final.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Head {
    pub len: usize,
    pub finished: bool,
}

struct Published {
    status: Status,
    snapshot: Snapshot,
}

struct Shared {
    lines: RwLock<Vec<Arc<str>>>,
    published: RwLock<Arc<Published>>,
    head: watch::Sender<Head>,
}

enum Request {
    Command(CommandRequest, oneshot::Sender<Result<Ack, Rejection>>),
    Shutdown,
}

/// Cheap, cloneable access to a running driver.
#[derive(Clone)]
pub struct Handle {
    shared: Arc<Shared>,
    tx: mpsc::Sender<Request>,
}

impl Handle {
    /// Status and snapshot from the same step boundary.
    pub fn snapshot(&self) -> (Status, Snapshot) {
        let p = self.published();
        (p.status.clone(), p.snapshot.clone())
    }

    /// Run `f` on the latest published status and snapshot without copying them.
    pub fn with_snapshot<R>(&self, f: impl FnOnce(&Status, &Snapshot) -> R) -> R {
        let p = self.published();
        f(&p.status, &p.snapshot)
    }

    fn published(&self) -> Arc<Published> {
        self.shared.published.read().expect("snapshot lock").clone()
    }

    /// Log lines from index `since` on.
    pub fn lines_since(&self, since: usize) -> Vec<Arc<str>> {
        let lines = self.shared.lines.read().expect("log lock");
        lines.get(since..).map(<[_]>::to_vec).unwrap_or_default()
    }

    /// Log lines in `from..to`, clamped to what exists.
    pub fn lines(&self, from: usize, to: usize) -> Vec<Arc<str>> {
        let lines = self.shared.lines.read().expect("log lock");
        let to = to.min(lines.len());
        lines.get(from.min(to)..to).map(<[_]>::to_vec).unwrap_or_default()
    }

    pub fn head(&self) -> Head {
        *self.shared.head.borrow()
    }

    /// Changes whenever lines are appended or the driver finishes.
    pub fn watch(&self) -> watch::Receiver<Head> {
        self.shared.head.subscribe()
    }

    /// Pass a command to the driver and wait for its verdict.
    pub async fn submit(&self, req: CommandRequest) -> Result<Ack, Rejection> {
        let (reply, rx) = oneshot::channel();
        self.tx.send(Request::Command(req, reply)).map_err(|_| Rejection::driver_stopped())?;
        rx.await.map_err(|_| Rejection::driver_stopped())?
    }

    /// Ask the driver to stop at the next step boundary.
    pub fn request_shutdown(&self) {
        let _ = self.tx.send(Request::Shutdown);
    }

    /// [`Handle::submit`] for callers outside an async runtime.
    pub fn submit_blocking(&self, req: CommandRequest) -> Result<Ack, Rejection> {
        let (reply, rx) = oneshot::channel();
        self.tx.send(Request::Command(req, reply)).map_err(|_| Rejection::driver_stopped())?;
        rx.blocking_recv().map_err(|_| Rejection::driver_stopped())?
    }
}

/// A mission stepping on its own thread.
pub struct Driver {
    handle: Handle,
    thread: JoinHandle<Mission>,
}

impl Driver {
    pub fn spawn(mission: Mission, cfg: DriverConfig) -> Self {
        let published = Arc::new(Published { status: status(&mission, &cfg_state(&cfg), true), snapshot: mission.snapshot() });
        let lines: Vec<Arc<str>> = mission.log().iter().map(|e| Arc::from(e.to_line())).collect();
        let (head, _) = watch::channel(Head { len: lines.len(), finished: mission.ended().is_some() });
        let shared = Arc::new(Shared { lines: RwLock::new(lines), published: RwLock::new(published), head });
        let (tx, rx) = mpsc::channel();
        let handle = Handle { shared: shared.clone(), tx };
        let thread = std::thread::Builder::new()
            .name("mission-driver".into())
            .spawn(move || Loop::new(mission, cfg, shared).run(rx))
            .expect("spawn driver thread");
        Self { handle, thread }
    }

    pub fn handle(&self) -> Handle {
        self.handle.clone()
    }

    /// Wait for the driver to exit on its own and take the mission back.
    pub fn join(self) -> Mission {
        self.thread.join().expect("driver thread panicked")
    }

    /// Stop the driver at the next step boundary and take the mission back.
    pub fn shutdown(self) -> Mission {
        self.handle.request_shutdown();
        self.join()
    }
}

#[derive(Clone, Copy)]
struct Pace {
    paused: bool,
    speed: Option<f64>,
}

fn cfg_state(cfg: &DriverConfig) -> Pace {
    Pace { paused: cfg.paused, speed: cfg.speed }
}

fn status(m: &Mission, pace: &Pace, running: bool) -> Status {
    Status {
        step: m.world().step_index(),
        time: m.time(),
        paused: pace.paused,
        speed: pace.speed,
        ended: m.ended(),
        running,
    }
}

fn valid_speed(s: Option<f64>) -> bool {
    s.is_none_or(|s| s.is_finite() && s > 0.0)
}

struct Loop {
    mission: Mission,
    shared: Arc<Shared>,
    pace: Pace,
    until: Option<f64>,
    stop_at_end: bool,
    sent: usize,
    last_publish: Instant,
    next_step_at: Instant,
}

impl Loop {
    fn new(mission: Mission, cfg: DriverConfig, shared: Arc<Shared>) -> Self {
        let now = Instant::now();
        Self {
            sent: mission.log().len(),
            mission,
            shared,
            pace: cfg_state(&cfg),
            until: cfg.until,
            stop_at_end: cfg.stop_at_end,
            last_publish: now,
            next_step_at: now,
        }
    }

    fn run(mut self, rx: mpsc::Receiver<Request>) -> Mission {
        self.publish(true);
        loop {
            let ended = self.mission.ended().is_some();
            if ended && self.stop_at_end {
                break;
            }
            let idle = ended || self.pace.paused;
            let wait = if idle {
                IDLE_POLL
            } else if self.pace.speed.is_some() {
                self.next_step_at.saturating_duration_since(Instant::now())
            } else {
                Duration::ZERO
            };
            let msg = if wait.is_zero() {
                rx.try_recv().map_err(|e| match e {
                    TryRecvError::Empty => RecvTimeoutError::Timeout,
                    TryRecvError::Disconnected => RecvTimeoutError::Disconnected,
                })
            } else {
                rx.recv_timeout(wait)
            };
            match msg {
                Ok(Request::Shutdown) | Err(RecvTimeoutError::Disconnected) => break,
                Ok(Request::Command(req, reply)) => {
                    let verdict = self.apply(req);
                    let _ = reply.send(verdict);
                    self.publish(true);
                    continue;
                }
                Err(RecvTimeoutError::Timeout) => {}
            }
            if idle || (self.pace.speed.is_some() && Instant::now() < self.next_step_at) {
                continue;
            }
            self.step();
        }
        self.finish()
    }

    fn apply(&mut self, req: CommandRequest) -> Result<Ack, Rejection> {
        let received_at = self.mission.time();
        let ack = |m: &Mission| Ack { applied_at: m.world().step_index(), received_at };
        match req.command.into_mission() {
            Ok(c) => {
                let applied_at = self.mission.submit(req.client, c)?;
                Ok(Ack { applied_at, received_at })
            }
            Err(GatewayCommand::Pause) => {
                self.pace.paused = true;
                Ok(ack(&self.mission))
            }
            Err(GatewayCommand::Resume) => {
                self.pace.paused = false;
                self.next_step_at = Instant::now();
                Ok(ack(&self.mission))
            }
            Err(GatewayCommand::SetSpeed { speed }) => {
                if !valid_speed(speed) {
                    return Err(Rejection::new("invalid_speed", "speed must be positive and finite, or null"));
                }
                self.pace.speed = speed;
                self.next_step_at = Instant::now();
                Ok(ack(&self.mission))
            }
            Err(_) => unreachable!("mission commands are handled above"),
        }
    }

    fn step(&mut self) {
        self.mission.step();
        if let Some(t) = self.until {
            if self.mission.ended().is_none() && self.mission.time() >= t - 1e-9 {
                self.mission.finish(EndOutcome::Stopped);
            }
        }
        if let Some(s) = self.pace.speed {
            let now = Instant::now();
            self.next_step_at += Duration::from_secs_f64(self.mission.world().dt() / s);
            if self.next_step_at + MAX_LAG < now {
                self.next_step_at = now;
            }
        }
        let force = self.pace.speed.is_some() || self.mission.ended().is_some();
        self.publish(force);
    }

    /// Append new log lines; refresh the snapshot when forced or due.
    fn publish(&mut self, force: bool) {
        let log = self.mission.log();
        if log.len() > self.sent {
            let fresh: Vec<Arc<str>> = log[self.sent..].iter().map(|e| Arc::from(e.to_line())).collect();
            self.shared.lines.write().expect("log lock").extend(fresh);
            self.sent = log.len();
        }
        if force || self.last_publish.elapsed() >= PUBLISH_EVERY {
            self.refresh(true);
        }
        let head = Head { len: self.sent, finished: self.mission.ended().is_some() };
        self.shared.head.send_if_modified(|h| std::mem::replace(h, head) != head);
    }

    fn refresh(&mut self, running: bool) {
        let p = Arc::new(Published { status: status(&self.mission, &self.pace, running), snapshot: self.mission.snapshot() });
        *self.shared.published.write().expect("snapshot lock") = p;
        self.last_publish = Instant::now();
    }

    fn finish(mut self) -> Mission {
        self.publish(true);
        self.refresh(false);
        self.shared.head.send_modify(|h| h.finished = true);
        self.mission
    }
}
