use crate::domain::{TaskKind, TaskProgress, Task, UavSpec};
use crate::geometry::{path_length, Point3};
use crate::scalar::Scalar;

/// Motion and holding needed to carry out one task from a given position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leg<S> {
    /// Meters flown before the work starts.
    pub approach: S,
    /// Meters flown as part of the work.
    pub path: S,
    /// Seconds spent hovering.
    pub hover: S,
    /// Seconds spent landed.
    pub landed: S,
    pub end: Point3<S>,
}

impl<S: Scalar> Leg<S> {
    pub fn energy(&self, spec: &UavSpec<S>) -> S {
        spec.travel_rate * (self.approach + self.path) + spec.hover_rate * self.hover
    }

    pub fn duration(&self, spec: &UavSpec<S>) -> S {
        (self.approach + self.path) / spec.speed + self.hover + self.landed
    }
}

/// Whether `spot` is the vehicle's station, where waiting costs nothing.
pub fn at_station<S: Scalar>(spec: &UavSpec<S>, spot: Point3<S>) -> bool {
    spot.distance(spec.station) <= S::lit(1e-9)
}

/// Describe what `task` demands from `from`, skipping work already done per `resume`.
pub fn leg<S: Scalar>(spec: &UavSpec<S>, from: Point3<S>, task: &Task<S>, resume: Option<&TaskProgress<S>>) -> Leg<S> {
    let held = match resume {
        Some(TaskProgress::Hold { elapsed }) => *elapsed,
        _ => S::zero(),
    };
    let remaining_hold = (task.hold_duration() - held).max(S::zero());
    let zero = S::zero();
    match task.kind {
        TaskKind::Inspect => {
            let next = match resume {
                Some(TaskProgress::Inspect { next_waypoint }) => *next_waypoint,
                _ => 0,
            };
            let wps = &task.waypoints()[next.min(task.waypoints().len())..];
            match wps.first() {
                None => Leg { approach: zero, path: zero, hover: zero, landed: zero, end: from },
                Some(first) => Leg {
                    approach: from.distance(*first),
                    path: path_length(wps),
                    hover: zero,
                    landed: zero,
                    end: *wps.last().expect("non-empty"),
                },
            }
        }
        TaskKind::Monitor => Leg {
            approach: from.distance(task.start_location),
            path: zero,
            hover: remaining_hold,
            landed: zero,
            end: task.start_location,
        },
        TaskKind::Deliver => {
            let picked = matches!(resume, Some(TaskProgress::Deliver { picked: true }));
            let approach = if picked {
                from.distance(task.start_location)
            } else {
                from.distance(spec.station) + spec.station.distance(task.start_location)
            };
            Leg { approach, path: zero, hover: task.hold_duration(), landed: zero, end: task.start_location }
        }
        TaskKind::Recharge => Leg {
            approach: from.distance(spec.station),
            path: zero,
            hover: zero,
            landed: remaining_hold,
            end: spec.station,
        },
        TaskKind::Wait => {
            let spot = task.start_location;
            let (hover, landed) = if at_station(spec, spot) { (zero, remaining_hold) } else { (remaining_hold, zero) };
            Leg { approach: from.distance(spot), path: zero, hover, landed, end: spot }
        }
    }
}

/// Energy to carry out `task` from `from`, with the linear battery model.
pub fn estimate_energy<S: Scalar>(spec: &UavSpec<S>, from: Point3<S>, task: &Task<S>) -> S {
    leg(spec, from, task, None).energy(spec)
}

/// Energy to fly from `p` back to the station.
pub fn return_energy<S: Scalar>(spec: &UavSpec<S>, p: Point3<S>) -> S {
    spec.travel_rate * p.distance(spec.station)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Capability, Work};

    fn spec(tr: f64, hr: f64) -> UavSpec<f64> {
        UavSpec {
            id: "u".into(),
            capabilities: [Capability::Inspection, Capability::Monitoring].into(),
            speed: 5.0,
            battery_capacity: 1000.0,
            travel_rate: tr,
            hover_rate: hr,
            reserve_fraction: 0.1,
            station: Point3::new(0.0, 0.0, 0.0),
        }
    }

    fn monitor(at: Point3<f64>, d: f64) -> Task<f64> {
        let mut t = Task::wait("m".into(), at, d);
        t.kind = TaskKind::Monitor;
        t.required_capability = Some(Capability::Monitoring);
        t
    }

    #[test]
    fn zero_work_is_free() {
        let s = spec(1.0, 1.0);
        assert_eq!(estimate_energy(&s, Point3::zero(), &monitor(Point3::zero(), 0.0)), 0.0);
    }

    #[test]
    fn pure_travel() {
        let s = spec(1.0, 0.0);
        let mut t = monitor(Point3::zero(), 0.0);
        t.kind = TaskKind::Inspect;
        t.work = Work::Waypoints(vec![Point3::new(30.0, 40.0, 0.0), Point3::new(30.0, 90.0, 0.0)]);
        assert_eq!(estimate_energy(&s, Point3::zero(), &t), 100.0);
    }

    #[test]
    fn approach_plus_monitoring() {
        let s = spec(0.5, 0.2);
        let t = monitor(Point3::new(30.0, 40.0, 0.0), 200.0);
        assert!((estimate_energy(&s, Point3::zero(), &t) - 65.0).abs() < 1e-12);
    }

    #[test]
    fn wait_at_station_is_free_and_airborne_wait_hovers() {
        let s = spec(1.0, 2.0);
        let home = Task::wait("w".into(), s.station, 10.0);
        assert_eq!(estimate_energy(&s, s.station, &home), 0.0);
        let away = Task::wait("w".into(), Point3::new(0.0, 0.0, 10.0), 10.0);
        assert_eq!(estimate_energy(&s, Point3::new(0.0, 0.0, 10.0), &away), 20.0);
    }

    #[test]
    fn resume_skips_done_work() {
        let s = spec(1.0, 1.0);
        let t = monitor(Point3::zero(), 100.0);
        let l = leg(&s, Point3::zero(), &t, Some(&TaskProgress::Hold { elapsed: 40.0 }));
        assert_eq!(l.hover, 60.0);
    }
}
