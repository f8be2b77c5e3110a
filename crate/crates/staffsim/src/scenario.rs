//! Rescheduling scenarios: a confirmed schedule, a set of injected
//! pending tasks, and a before/after comparison of the outcome.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use staffsim_core::criteria::score_schedule;
use staffsim_core::rescheduler::reschedule;
use staffsim_core::scheduler::{workers_with_calendars, PlanContext, SchedulerError};
use staffsim_core::{Schedule, TaskId, TaskSpec, Timestep};

use crate::sim::SimState;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub now: Timestep,
    /// All tasks the scenario mentions, scheduled or pending.
    pub tasks: Vec<TaskSpec>,
    /// Assignments confirmed before the disruption.
    pub schedule: Schedule,
    /// Tasks waiting to be (re)placed, usually one urgent arrival.
    pub pending: Vec<TaskId>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct StartChange {
    pub task: TaskId,
    pub old_alpha: Option<Timestep>,
    pub new_alpha: Option<Timestep>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CriterionDelta {
    pub id: u8,
    pub before: f64,
    pub after: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RescheduleReport {
    pub before: Schedule,
    pub after: Schedule,
    pub canceled: Vec<TaskId>,
    pub unplaced: Vec<TaskId>,
    pub start_changes: Vec<StartChange>,
    pub criteria: Vec<CriterionDelta>,
    pub v_before: f64,
    pub v_after: f64,
}

/// Run the rescheduler on a scenario against the environment's workers
/// and profiling store.
pub fn run_scenario(
    env: &mut SimState,
    scenario: &Scenario,
) -> Result<RescheduleReport, SchedulerError> {
    let mut tasks: BTreeMap<TaskId, TaskSpec> = env.tasks.clone();
    for t in &scenario.tasks {
        tasks.insert(t.id.clone(), t.clone());
    }
    let params = env.criteria_params();
    let sched_cfg = env.scheduler_config();
    let workers_cal = workers_with_calendars(&env.workers, &scenario.schedule, &tasks);

    let ctx = PlanContext {
        tasks: &tasks,
        workers: &workers_cal,
        weights: &env.config.weights,
        params: &params,
        config: &sched_cfg,
        now: scenario.now,
    };
    let before = scenario.schedule.clone();
    let outcome = reschedule(
        &scenario.pending,
        &before,
        &mut env.profiles,
        None,
        &ctx,
        env.config.max_reschedule_attempts,
    )?;

    let (v_before, scores_before) = score_schedule(
        &before,
        &tasks,
        &env.workers,
        &env.profiles,
        &params,
        &env.config.weights,
    )?;
    let (v_after, scores_after) = score_schedule(
        &outcome.schedule,
        &tasks,
        &env.workers,
        &env.profiles,
        &params,
        &env.config.weights,
    )?;

    let mut mentioned: Vec<TaskId> = before
        .assignments
        .keys()
        .chain(outcome.schedule.assignments.keys())
        .cloned()
        .collect();
    mentioned.sort();
    mentioned.dedup();
    let start_changes: Vec<StartChange> = mentioned
        .into_iter()
        .filter_map(|task| {
            let old_alpha = before.get(&task).map(|t| t.interval.alpha);
            let new_alpha = outcome.schedule.get(&task).map(|t| t.interval.alpha);
            (old_alpha != new_alpha).then_some(StartChange {
                task,
                old_alpha,
                new_alpha,
            })
        })
        .collect();

    let criteria = scores_before
        .iter()
        .zip(&scores_after)
        .map(|(b, a)| CriterionDelta {
            id: b.id,
            before: b.value,
            after: a.value,
        })
        .collect();

    Ok(RescheduleReport {
        before,
        after: outcome.schedule,
        canceled: outcome.canceled,
        unplaced: outcome.unplaced,
        start_changes,
        criteria,
        v_before,
        v_after,
    })
}

pub fn render_report(r: &RescheduleReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "canceled tasks: {}", join_ids(&r.canceled));
    let _ = writeln!(out, "unplaced tasks: {}", join_ids(&r.unplaced));
    for c in &r.start_changes {
        let fmt = |a: Option<Timestep>| a.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "start change {}: {} -> {}",
            c.task,
            fmt(c.old_alpha),
            fmt(c.new_alpha)
        );
    }
    for d in &r.criteria {
        let _ = writeln!(
            out,
            "criterion {}: {:.4} -> {:.4}",
            d.id, d.before, d.after
        );
    }
    let _ = writeln!(out, "V: {:.4} -> {:.4}", r.v_before, r.v_after);
    out
}

fn join_ids(ids: &[TaskId]) -> String {
    if ids.is_empty() {
        return "(none)".into();
    }
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
