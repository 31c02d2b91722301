use std::fs;
use std::io::BufReader;
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use skycrew_core::domain::Violation;
use skycrew_core::scenario::validate_scenario;
use skycrew_core::sim::{read_log, replay, write_log, EndOutcome, Record};
use skycrew_core::{LogEntry, Mission, ScenarioConfig};
use skycrew_gateway::{Driver, DriverConfig};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::exit;
use crate::gantt;
use crate::report::{plan_reports, MissionReport};

/// How long open connections get to close once the mission is over.
const SERVER_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario is invalid ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
}

/// Parse and validate a scenario file. Returns it with its advisories.
pub fn load_scenario(path: &Path) -> Result<(ScenarioConfig, Vec<Violation>), LoadError> {
    let s = ScenarioConfig::from_json(&fs::read_to_string(path)?)?;
    let (advisory, blocking): (Vec<_>, Vec<_>) = validate_scenario(&s).into_iter().partition(|v| v.advisory);
    if !blocking.is_empty() {
        return Err(LoadError::Invalid(blocking));
    }
    Ok((s, advisory))
}

fn load_or_report(path: &Path) -> Option<ScenarioConfig> {
    match load_scenario(path) {
        Ok((s, advisories)) => {
            for v in advisories {
                eprintln!("warning: {v}");
            }
            Some(s)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            if let LoadError::Invalid(vs) = e {
                for v in vs {
                    eprintln!("  {v}");
                }
            }
            None
        }
    }
}

pub fn validate_file(path: &Path) -> u8 {
    match load_or_report(path) {
        Some(s) => {
            println!(
                "{}: ok, {} vehicles, {} actions, {} faults",
                path.display(),
                s.fleet.len(),
                s.actions.len(),
                s.faults.len()
            );
            exit::OK
        }
        None => exit::INVALID,
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub speed: Option<f64>,
    pub until: Option<f64>,
    /// Attach the gateway on this port.
    pub serve: Option<u16>,
    /// Keep serving after the mission ends, until interrupted.
    pub hold: bool,
    /// Start paused; needs the gateway to resume.
    pub paused: bool,
}

pub fn run(o: &RunOptions) -> Result<u8> {
    let Some(mut scenario) = load_or_report(&o.scenario) else { return Ok(exit::INVALID) };
    if let Some(seed) = o.seed {
        scenario.seed = seed;
    }
    if o.speed.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
        eprintln!("error: --speed must be positive");
        return Ok(exit::INVALID);
    }
    if o.until.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        eprintln!("error: --until must be positive");
        return Ok(exit::INVALID);
    }
    let vehicles: Vec<_> = scenario.fleet.iter().map(|u| u.id.clone()).collect();
    let cfg = DriverConfig { speed: o.speed, paused: o.paused, until: o.until, stop_at_end: !o.hold };
    let mission = Mission::new(scenario);
    let mut mission = match o.serve {
        Some(port) => serve(mission, cfg, port)?,
        None => Driver::spawn(mission, cfg).join(),
    };
    if mission.ended().is_none() {
        mission.finish(EndOutcome::Stopped);
    }
    let report = write_artifacts(&o.out, mission.log(), &vehicles)?;
    print_summary(&report, &o.out);
    Ok(match report.outcome {
        Some(EndOutcome::Completed | EndOutcome::Stopped) => exit::OK,
        Some(EndOutcome::TimedOut) | None => exit::FAULT,
    })
}

fn serve(mission: Mission, cfg: DriverConfig, port: u16) -> Result<Mission> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, port)).await.with_context(|| format!("binding port {port}"))?;
        eprintln!("gateway listening on http://{}", listener.local_addr()?);
        let driver = Driver::spawn(mission, cfg);
        let handle = driver.handle();
        let (stop, stopped) = oneshot::channel::<()>();
        let server = tokio::spawn(skycrew_gateway::serve(listener, handle.clone(), async {
            let _ = stopped.await;
        }));
        let mut join = tokio::task::spawn_blocking(move || driver.join());
        let mission = tokio::select! {
            m = &mut join => m?,
            _ = tokio::signal::ctrl_c() => {
                eprintln!("interrupted, stopping the mission");
                handle.request_shutdown();
                join.await?
            }
        };
        let _ = stop.send(());
        match tokio::time::timeout(SERVER_GRACE, server).await {
            Ok(r) => r??,
            Err(_) => eprintln!("warning: gateway connections still open at exit"),
        }
        Ok(mission)
    })
}

/// Write `events.log`, `plans/plan-vNNNN.json`, `plan.json` and `gantt.svg`.
pub fn write_artifacts(out: &Path, log: &[LogEntry], vehicles: &[skycrew_core::domain::UavId]) -> Result<MissionReport> {
    let plans = out.join("plans");
    if plans.exists() {
        fs::remove_dir_all(&plans).with_context(|| format!("clearing {}", plans.display()))?;
    }
    fs::create_dir_all(&plans).with_context(|| format!("creating {}", plans.display()))?;
    let mut f = std::io::BufWriter::new(fs::File::create(out.join("events.log"))?);
    write_log(&mut f, log)?;
    std::io::Write::flush(&mut f)?;
    for r in plan_reports(log) {
        fs::write(plans.join(format!("plan-v{:04}.json", r.version)), serde_json::to_string_pretty(&r)?)?;
    }
    let report = MissionReport::new(log);
    fs::write(out.join("plan.json"), serde_json::to_string_pretty(&report)?)?;
    let title = format!("{}: schedule through plan v{}", report.scenario, report.final_version);
    fs::write(out.join("gantt.svg"), gantt::render(&title, vehicles, &report.schedule))?;
    Ok(report)
}

fn print_summary(r: &MissionReport, out: &Path) {
    let outcome = r.outcome.map_or("unfinished".to_owned(), |o| format!("{o:?}").to_lowercase());
    println!("{}: {outcome} at t={:.1}, {} replans, final plan v{}", r.scenario, r.end_time, r.replans, r.final_version);
    for u in &r.unassignable {
        println!("unassignable: {} ({:?})", u.task, u.reason);
    }
    println!("artifacts in {}", out.display());
}

/// Re-run a log and compare. Optionally write the reconstructed snapshot.
pub fn replay_log(path: &Path, snapshot_out: Option<&Path>) -> Result<u8> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let lines = match read_log::<f64>(BufReader::new(file)) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return Ok(exit::INVALID);
        }
    };
    let r = match replay(&lines) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return Ok(exit::INVALID);
        }
    };
    if let Some(p) = snapshot_out {
        fs::write(p, serde_json::to_string_pretty(&r.snapshot)?)?;
    }
    if let Some(d) = &r.divergence {
        println!("diverged at line {}", d.line + 1);
        println!("  logged:   {}", d.expected.as_deref().unwrap_or("<end of log>"));
        println!("  replayed: {}", d.got.as_deref().unwrap_or("<mission already over>"));
        return Ok(exit::FAULT);
    }
    if !r.complete {
        eprintln!(
            "warning: log is truncated; state after line {} (step {}, t={:.1})",
            r.matched, r.snapshot.step, r.snapshot.time
        );
        return Ok(exit::OK);
    }
    let logged = lines.iter().rev().find_map(|(_, e)| match &e.record {
        Record::End { snapshot, .. } => Some(snapshot),
        _ => None,
    });
    if logged != Some(&r.snapshot) {
        println!("replayed final snapshot differs from the logged one");
        return Ok(exit::FAULT);
    }
    println!("replay matches: {} lines, final step {}, t={:.1}", r.matched, r.snapshot.step, r.snapshot.time);
    Ok(exit::OK)
}
