//! Interval arithmetic over worker calendars: full-time exclusivity,
//! daily workload accounting and earliest-free-interval search.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{Interval, TaskId, TaskSpec, Timestep, Timing};

/// Workload tolerance for floating-point capacity comparisons.
const EPS: f64 = 1e-9;

/// One calendar entry: an assigned task with its interval, timing and
/// per-day workload rate.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CalendarEntry {
    pub task: TaskId,
    pub interval: Interval,
    pub timing: Timing,
    pub workload_rate: f64,
}

/// Immutable snapshot of a worker's assignments.
#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CalendarView {
    pub entries: Vec<CalendarEntry>,
}

impl CalendarView {
    pub fn new() -> Self {
        CalendarView::default()
    }

    pub fn push_task(&mut self, task: &TaskSpec, interval: Interval) {
        self.entries.push(CalendarEntry {
            task: task.id.clone(),
            interval,
            timing: task.timing,
            workload_rate: task.workload_rate(),
        });
    }

    pub fn remove_task(&mut self, task: &TaskId) {
        self.entries.retain(|e| &e.task != task);
    }

    /// Total workload rate of entries active at `day`.
    pub fn daily_workload(&self, day: Timestep) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.interval.contains(day))
            .map(|e| e.workload_rate)
            .sum()
    }

    /// True iff no full-time entry overlaps `interval`.
    pub fn fulltime_free(&self, interval: &Interval) -> bool {
        !self
            .entries
            .iter()
            .any(|e| e.timing == Timing::FullTime && e.interval.overlaps(interval))
    }
}

/// Earliest start `alpha` in `[from, horizon - duration]` at which every
/// team member can take `task`: full-time exclusivity holds over the whole
/// interval (for full-time tasks) and the member's daily workload plus the
/// task's rate stays within capacity on every day. `None` if the horizon
/// is exhausted.
pub fn earliest_team_start(
    cals: &[&CalendarView],
    task: &TaskSpec,
    capacities: &[f64],
    from: Timestep,
    horizon: Timestep,
) -> Option<Timestep> {
    debug_assert_eq!(cals.len(), capacities.len());
    let duration = task.duration;
    if horizon < from || horizon - from < duration {
        return None;
    }
    let rate = task.workload_rate();
    let last_start = horizon - duration;
    'alpha: for alpha in from..=last_start {
        let interval = Interval::new(alpha, alpha + duration);
        for (cal, &capacity) in cals.iter().zip(capacities) {
            if task.timing == Timing::FullTime && !cal.fulltime_free(&interval) {
                continue 'alpha;
            }
            for day in interval.alpha..interval.beta {
                if cal.daily_workload(day) + rate > capacity + EPS {
                    continue 'alpha;
                }
            }
        }
        return Some(alpha);
    }
    None
}
