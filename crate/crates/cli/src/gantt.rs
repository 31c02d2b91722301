//! SVG Gantt chart of a schedule, one row per vehicle, coloured by task kind.

use std::fmt::Write as _;

use skycrew_core::domain::{TaskKind, UavId};

use crate::report::Bar;

const LABEL_W: f64 = 90.0;
const CHART_W: f64 = 900.0;
const ROW_H: f64 = 36.0;
const BAR_H: f64 = 24.0;
const TOP: f64 = 30.0;
const AXIS_H: f64 = 30.0;
const LEGEND_H: f64 = 30.0;

pub const KINDS: [TaskKind; 5] = [TaskKind::Deliver, TaskKind::Inspect, TaskKind::Monitor, TaskKind::Recharge, TaskKind::Wait];

pub fn colour(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Deliver => "#d62728",
        TaskKind::Inspect => "#1f77b4",
        TaskKind::Monitor => "#2ca02c",
        TaskKind::Recharge => "#ff7f0e",
        TaskKind::Wait => "#9e9e9e",
    }
}

pub fn label(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Deliver => "Delivery",
        TaskKind::Inspect => "Inspect",
        TaskKind::Monitor => "Monitoring",
        TaskKind::Recharge => "Recharge",
        TaskKind::Wait => "Wait",
    }
}

fn key(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Deliver => "deliver",
        TaskKind::Inspect => "inspect",
        TaskKind::Monitor => "monitor",
        TaskKind::Recharge => "recharge",
        TaskKind::Wait => "wait",
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round `span / 8` up to 1, 2 or 5 times a power of ten.
fn tick_step(span: f64) -> f64 {
    let raw = (span / 8.0).max(1e-9);
    let p = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * p).find(|s| *s >= raw).unwrap_or(10.0 * p)
}

/// Render `bars` for `vehicles`, in that row order. Vehicles without bars
/// get an empty row. Each bar carries its exact times in `data-start` and
/// `data-end`.
pub fn render(title: &str, vehicles: &[UavId], bars: &[Bar]) -> String {
    let horizon = bars.iter().map(|b| b.end).fold(0.0, f64::max).max(1.0);
    let x = |t: f64| LABEL_W + t / horizon * CHART_W;
    let height = TOP + ROW_H * vehicles.len() as f64 + AXIS_H + LEGEND_H;
    let width = LABEL_W + CHART_W + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{LABEL_W}" y="18" font-size="14">{}</text>"#, esc(title));
    for (row, uav) in vehicles.iter().enumerate() {
        let y = TOP + ROW_H * row as f64;
        let _ = writeln!(
            s,
            r#"<g class="row" data-uav="{u}"><text x="6" y="{ty}">{u}</text>"#,
            u = esc(uav.as_str()),
            ty = y + ROW_H / 2.0 + 4.0
        );
        for b in bars.iter().filter(|b| &b.uav == uav) {
            let (x0, x1) = (x(b.start), x(b.end));
            let _ = writeln!(
                s,
                r##"<rect class="bar" data-task="{task}" data-kind="{kind}" data-start="{start}" data-end="{end}" x="{x0:.2}" y="{by:.2}" width="{w:.2}" height="{BAR_H}" fill="{fill}" stroke="#ffffff" stroke-width="0.5"><title>{task} ({label}) {start:.1} to {end:.1}</title></rect>"##,
                task = esc(b.task.as_str()),
                kind = key(b.kind),
                start = b.start,
                end = b.end,
                by = y + (ROW_H - BAR_H) / 2.0,
                w = (x1 - x0).max(0.0),
                fill = colour(b.kind),
                label = label(b.kind),
            );
        }
        s.push_str("</g>\n");
    }
    let axis_y = TOP + ROW_H * vehicles.len() as f64;
    let _ = writeln!(s, r##"<line x1="{LABEL_W}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="#333333"/>"##, LABEL_W + CHART_W);
    let step = tick_step(horizon);
    let mut t = 0.0;
    while t <= horizon + 1e-9 {
        let tx = x(t);
        let _ = writeln!(
            s,
            r##"<line x1="{tx:.2}" y1="{axis_y}" x2="{tx:.2}" y2="{}" stroke="#333333"/><text x="{tx:.2}" y="{}" text-anchor="middle">{t}</text>"##,
            axis_y + 5.0,
            axis_y + 18.0
        );
        t += step;
    }
    let legend_y = axis_y + AXIS_H + 8.0;
    for (i, k) in KINDS.into_iter().enumerate() {
        let lx = LABEL_W + 120.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{legend_y}" width="14" height="14" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            colour(k),
            lx + 20.0,
            legend_y + 12.0,
            label(k)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use skycrew_core::domain::TaskId;

    fn bar(uav: &str, task: &str, kind: TaskKind, start: f64, end: f64) -> Bar {
        Bar { uav: UavId::new(uav), task: TaskId::new(task), kind, action: None, start, end, version: 1, finished: true }
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(tick_step(880.0), 200.0);
        assert_eq!(tick_step(8.0), 1.0);
        assert_eq!(tick_step(41.0), 10.0);
    }

    #[test]
    fn bars_keep_exact_times_and_escape_names() {
        let bars = [bar("u<1>", "a&b", TaskKind::Wait, 0.1, 0.30000000000000004)];
        let svg = render("t", &[UavId::new("u<1>")], &bars);
        assert!(svg.contains(r#"data-task="a&amp;b""#));
        assert!(svg.contains(r#"data-start="0.1" data-end="0.30000000000000004""#));
        assert!(svg.contains("u&lt;1&gt;"));
        assert!(svg.contains(colour(TaskKind::Wait)));
    }

    #[test]
    fn empty_schedule_still_renders_rows() {
        let svg = render("empty", &[UavId::new("a"), UavId::new("b")], &[]);
        assert_eq!(svg.matches(r#"class="row""#).count(), 2);
        assert_eq!(svg.matches(r#"class="bar""#).count(), 0);
    }
}
