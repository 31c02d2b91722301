//! Re-run a logged mission and check it reproduces the log line by line.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

use super::log::{Command, EndOutcome, LogEntry, Record};
use super::mission::Mission;
use super::snapshot::Snapshot;

/// First line where the re-run and the log disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub line: usize,
    pub expected: Option<String>,
    pub got: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ReplayReport<S> {
    /// State at the last reproduced line.
    pub snapshot: Snapshot<S>,
    /// The log ended with an end record and was reproduced entirely.
    pub complete: bool,
    pub matched: usize,
    pub divergence: Option<Divergence>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("log is empty")]
    Empty,
    #[error("first record is not a header")]
    NoHeader,
}

pub fn replay<S: Scalar>(lines: &[(String, LogEntry<S>)]) -> Result<ReplayReport<S>, ReplayError> {
    replay_to(lines, None)
}

/// [`replay`], then keep stepping up to `step` as long as no new line
/// appears. A prefix of a running mission's log does not say how many silent
/// steps followed its last line.
pub fn replay_to<S: Scalar>(lines: &[(String, LogEntry<S>)], step: Option<u64>) -> Result<ReplayReport<S>, ReplayError> {
    let (_, first) = lines.first().ok_or(ReplayError::Empty)?;
    let Record::Header { scenario } = &first.record else { return Err(ReplayError::NoHeader) };
    let mut mission = Mission::new(scenario.clone());
    let mut commands: BTreeMap<u64, Vec<(Option<String>, Command<S>)>> = BTreeMap::new();
    for (_, e) in lines {
        if let Record::Command { client, command } = &e.record {
            commands.entry(e.step).or_default().push((client.clone(), command.clone()));
        }
    }
    let report = |mission: &Mission<S>, matched: usize, divergence: Option<Divergence>| ReplayReport {
        snapshot: mission.snapshot(),
        complete: divergence.is_none() && matched == lines.len() && mission.ended().is_some(),
        matched,
        divergence,
    };
    let diverge = |line: usize, got: Option<String>| Divergence { line, expected: lines.get(line).map(|l| l.0.clone()), got };

    if mission.log()[0].to_line() != lines[0].0 {
        return Ok(report(&mission, 0, Some(diverge(0, Some(mission.log()[0].to_line())))));
    }
    let mut pos = 1;
    while pos < lines.len() {
        let (_, expected) = &lines[pos];
        if mission.ended().is_some() {
            return Ok(report(&mission, pos, Some(diverge(pos, None))));
        }
        let step = mission.world().step_index();
        let produced: Vec<String> = if matches!(expected.record, Record::End { outcome: EndOutcome::Stopped, .. })
            && expected.step == step
        {
            mission.finish(EndOutcome::Stopped);
            vec![mission.log().last().expect("end record").to_line()]
        } else {
            for (client, c) in commands.remove(&step).unwrap_or_default() {
                if let Err(e) = mission.submit(client, c) {
                    tracing::warn!(step, error = %e, "logged command refused on replay");
                }
            }
            mission.step().iter().map(LogEntry::to_line).collect()
        };
        for got in produced {
            if pos == lines.len() {
                // The log stops mid-step.
                break;
            }
            if got != lines[pos].0 {
                return Ok(report(&mission, pos, Some(diverge(pos, Some(got)))));
            }
            pos += 1;
        }
    }
    if let Some(target) = step {
        while mission.ended().is_none() && mission.world().step_index() < target {
            if let Some(got) = mission.step().first() {
                let got = got.to_line();
                return Ok(report(&mission, pos, Some(diverge(pos, Some(got)))));
            }
        }
    }
    Ok(report(&mission, pos, None))
}
