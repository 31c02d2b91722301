use crate::domain::{Origin, Span, Task, TaskId, TaskKind, TaskProgress, Work};
use crate::scalar::Scalar;

fn fmt_secs<S: Scalar>(v: S) -> String {
    let x = v.as_f64();
    let r = (x * 1000.0).round() / 1000.0;
    format!("{r}")
}

/// Id of the piece of logical task `logical` covering `span`.
pub fn piece_id<S: Scalar>(logical: &TaskId, span: &Span<S>) -> TaskId {
    match span {
        Span::Whole => logical.clone(),
        Span::Waypoints { indices } => {
            let contiguous = indices.windows(2).all(|w| w[1] == w[0] + 1);
            let body = match (indices.first(), indices.last()) {
                (Some(a), Some(b)) if contiguous => format!("wp{a}-{b}"),
                _ => format!("wp{}", indices.iter().map(usize::to_string).collect::<Vec<_>>().join("+")),
            };
            TaskId::new(format!("{logical}/{body}"))
        }
        Span::Coverage { from, to } => TaskId::new(format!("{logical}/t{}-{}", fmt_secs(*from), fmt_secs(*to))),
    }
}

fn coverage<S: Scalar>(t: &Task<S>) -> (S, S) {
    match t.origin.as_ref().map(|o| &o.span) {
        Some(Span::Coverage { from, to }) => (*from, *to),
        _ => (S::zero(), t.hold_duration()),
    }
}

fn indices<S: Scalar>(t: &Task<S>) -> Vec<usize> {
    match t.origin.as_ref().map(|o| &o.span) {
        Some(Span::Waypoints { indices }) => indices.clone(),
        _ => (0..t.waypoints().len()).collect(),
    }
}

/// Copy of `t` reduced to `span` with the given work.
pub(crate) fn piece<S: Scalar>(t: &Task<S>, span: Span<S>, work: Work<S>) -> Task<S> {
    let logical = t.logical_id().clone();
    let mut p = t.clone();
    p.id = piece_id(&logical, &span);
    p.origin = Some(Origin { task: logical, span });
    if let Work::Waypoints(w) = &work {
        p.start_location = w[0];
    }
    p.work = work;
    p
}

/// Split an inspection after its first `j` waypoints (0 < j < n).
pub(crate) fn split_inspect<S: Scalar>(t: &Task<S>, j: usize) -> (Task<S>, Task<S>) {
    let wps = t.waypoints();
    let idx = indices(t);
    let mut a = piece(t, Span::Waypoints { indices: idx[..j].to_vec() }, Work::Waypoints(wps[..j].to_vec()));
    let mut b = piece(t, Span::Waypoints { indices: idx[j..].to_vec() }, Work::Waypoints(wps[j..].to_vec()));
    a.not_before = t.not_before;
    b.sync_group = None;
    b.not_before = None;
    (a, b)
}

/// Split a monitoring after `secs` seconds (0 < secs < duration).
pub(crate) fn split_monitor<S: Scalar>(t: &Task<S>, secs: S) -> (Task<S>, Task<S>) {
    let (from, to) = coverage(t);
    let cut = from + secs;
    let a = piece(t, Span::Coverage { from, to: cut }, Work::Duration(secs));
    let mut b = piece(t, Span::Coverage { from: cut, to }, Work::Duration(to - cut));
    b.sync_group = None;
    b.not_before = None;
    (a, b)
}

/// Drop the first `secs` seconds of a monitoring piece; `None` if nothing is left.
pub(crate) fn trim_monitor_front<S: Scalar>(t: &Task<S>, secs: S) -> Option<Task<S>> {
    let (from, to) = coverage(t);
    let cut = from + secs;
    if cut >= to - S::tol() {
        return None;
    }
    let mut p = piece(t, Span::Coverage { from: cut, to }, Work::Duration(to - cut));
    p.sync_group = None;
    Some(p)
}

/// Monitoring piece covering `[from, from + secs)` of the same logical task.
pub(crate) fn monitor_slice<S: Scalar>(t: &Task<S>, from: S, secs: S) -> Task<S> {
    let mut p = piece(t, Span::Coverage { from, to: from + secs }, Work::Duration(secs));
    p.sync_group = None;
    p.not_before = None;
    p
}

/// What is left of `t` given its agent's progress, as a fresh piece.
/// `None` when the work is complete or the task is artificial.
pub fn remainder<S: Scalar>(t: &Task<S>, progress: Option<&TaskProgress<S>>) -> Option<Task<S>> {
    let mut out = match (t.kind, progress) {
        (TaskKind::Recharge | TaskKind::Wait, _) => return None,
        (TaskKind::Inspect, Some(TaskProgress::Inspect { next_waypoint })) => {
            let n = t.waypoints().len();
            if *next_waypoint >= n {
                return None;
            }
            if *next_waypoint == 0 {
                t.clone()
            } else {
                let idx = indices(t);
                piece(
                    t,
                    Span::Waypoints { indices: idx[*next_waypoint..].to_vec() },
                    Work::Waypoints(t.waypoints()[*next_waypoint..].to_vec()),
                )
            }
        }
        (TaskKind::Monitor, Some(TaskProgress::Hold { elapsed })) => {
            if *elapsed <= S::zero() {
                t.clone()
            } else {
                trim_monitor_front(t, *elapsed)?
            }
        }
        _ => t.clone(),
    };
    if progress.is_some() && out.id != t.id {
        out.sync_group = None;
    }
    out.not_before = None;
    Some(out)
}
