//! Recursive rescheduling: cancel as few lower-priority scheduled tasks
//! as possible to let a pending high-priority task start earlier, then
//! re-plan everything that was displaced.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::domain::{Schedule, TaskId, TaskSpec, Timestep, Tso, WorkerId, WorkerState};
use crate::profiling::ProfileStore;
use crate::scheduler::{
    check_feasibility, feasible_tsos, schedule, workers_with_calendars, PlanContext, QueryOracle,
    SchedulerConfig, SchedulerError, ViolationKind,
};

/// Result of a rescheduling run. Tasks that could not be placed anywhere
/// within the horizon stay in `unplaced`; `canceled` lists every task
/// whose previous assignment was removed (it may have been re-placed at a
/// different slot afterwards).
#[derive(Clone, PartialEq, Debug)]
pub struct RescheduleOutcome {
    pub schedule: Schedule,
    pub unplaced: Vec<TaskId>,
    pub canceled: Vec<TaskId>,
}

/// Scheduled tasks that could be canceled to make room for `t` in the
/// window starting at `h`: not yet started, overlapping the window,
/// strictly lower priority, and sharing at least one required role.
pub fn build_p_h(
    s: &Schedule,
    t: &TaskSpec,
    h: Timestep,
    k: Timestep,
    tasks: &BTreeMap<TaskId, TaskSpec>,
) -> BTreeSet<TaskId> {
    debug_assert!(k <= h);
    let window = crate::domain::Interval::new(h, h + t.duration);
    s.iter()
        .filter_map(|(id, tso)| {
            let other = tasks.get(id)?;
            let not_started = tso.interval.alpha >= k;
            let overlaps = tso.interval.overlaps(&window);
            let lower_priority = other.priority < t.priority;
            let shares_role = other
                .required_roles
                .keys()
                .any(|r| t.required_roles.contains_key(r));
            (not_started && overlaps && lower_priority && shares_role).then(|| id.clone())
        })
        .collect()
}

/// If removing the tasks in `c` lets `t` start strictly before
/// `alpha_min`, return that earliest TSO.
#[allow(clippy::too_many_arguments)]
pub fn can_schedule_in_place(
    t: &TaskSpec,
    c: &[TaskId],
    s: &Schedule,
    alpha_min: Timestep,
    base_workers: &BTreeMap<WorkerId, WorkerState>,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    now: Timestep,
    cfg: &SchedulerConfig,
) -> Result<Option<Tso>, SchedulerError> {
    let mut stripped = s.clone();
    for id in c {
        stripped.remove(id);
    }
    let workers = workers_with_calendars(base_workers, &stripped, tasks);
    let tsos = feasible_tsos(t, &workers, tasks, &Schedule::new(), now, cfg)?;
    Ok(tsos
        .into_iter()
        .next()
        .filter(|tso| tso.interval.alpha < alpha_min))
}

/// Cancellation-inconvenience sort key: prefer combinations with low total
/// priority, then tasks that are easy to reallocate (few required roles),
/// then lexicographic ids for determinism.
fn combo_key(c: &[TaskId], tasks: &BTreeMap<TaskId, TaskSpec>) -> (u32, u32, Vec<TaskId>) {
    let prio: u32 = c.iter().filter_map(|id| tasks.get(id)).map(|t| t.priority).sum();
    let roles: u32 = c
        .iter()
        .filter_map(|id| tasks.get(id))
        .map(|t| t.required_roles.len() as u32)
        .sum();
    (prio, roles, c.to_vec())
}

fn combos_of(pool: &BTreeSet<TaskId>, size: usize) -> Vec<Vec<TaskId>> {
    let items: Vec<&TaskId> = pool.iter().collect();
    if size == 0 || size > items.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i].clone()).collect());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + items.len() - size {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Reschedule pending tasks onto `s_prev`, canceling minimal sets of
/// lower-priority assignments when that lets a higher-priority pending
/// task start earlier. `max_attempts` bounds the number of cancellation
/// combinations tried per task.
pub fn reschedule(
    pending: &[TaskId],
    s_prev: &Schedule,
    profiles: &mut ProfileStore,
    mut oracle: Option<&mut dyn QueryOracle>,
    ctx: &PlanContext<'_>,
    max_attempts: usize,
) -> Result<RescheduleOutcome, SchedulerError> {
    debug_assert!(max_attempts >= 1);
    let mut s = s_prev.clone();
    let mut queue: BTreeSet<TaskId> = pending.iter().cloned().collect();
    let mut canceled: Vec<TaskId> = Vec::new();

    // Problematic assignments (infeasible under the current worker state)
    // go back to pending. Deadline misses are reported elsewhere, never
    // enforced.
    for violation in check_feasibility(&s, ctx.tasks, ctx.workers) {
        if violation.kind != ViolationKind::Deadline && s.remove(&violation.task).is_some() {
            queue.insert(violation.task);
        }
    }

    let mut unplaced: Vec<TaskId> = Vec::new();
    let depth_bound = queue.len() + s.len() + 1;
    let mut depth = 0usize;

    while !queue.is_empty() {
        depth += 1;
        assert!(
            depth <= depth_bound,
            "rescheduling recursion exceeded its bound"
        );

        // Highest priority first; ties by arrival, then id.
        let t_id = queue
            .iter()
            .filter(|id| ctx.tasks.contains_key(*id))
            .max_by(|a, b| {
                let ta = &ctx.tasks[*a];
                let tb = &ctx.tasks[*b];
                ta.priority
                    .cmp(&tb.priority)
                    .then(tb.arrival_time.cmp(&ta.arrival_time))
                    .then(b.cmp(a))
            })
            .cloned();
        let Some(t_id) = t_id else {
            // Pending ids without a spec cannot be scheduled.
            unplaced.extend(queue.iter().cloned());
            break;
        };
        queue.remove(&t_id);
        let t = &ctx.tasks[&t_id];

        let workers_cur = workers_with_calendars(ctx.workers, &s, ctx.tasks);
        let tsos = feasible_tsos(t, &workers_cur, ctx.tasks, &Schedule::new(), ctx.now, ctx.config)?;
        let alpha_min = tsos
            .first()
            .map(|tso| tso.interval.alpha)
            .unwrap_or_else(|| ctx.now.saturating_add(ctx.config.planning_horizon));

        if alpha_min > ctx.now {
            let window: Vec<BTreeSet<TaskId>> = (ctx.now..alpha_min)
                .map(|h| build_p_h(&s, t, h, ctx.now, ctx.tasks))
                .collect();
            let max_pool = window.iter().map(|p| p.len()).max().unwrap_or(0);

            let mut attempts = 0usize;
            let mut size = 1usize;
            'search: while size <= max_pool {
                let mut tried: BTreeSet<Vec<TaskId>> = BTreeSet::new();
                for pool in &window {
                    let mut combos: Vec<Vec<TaskId>> = combos_of(pool, size)
                        .into_iter()
                        .filter(|c| !tried.contains(c))
                        .collect();
                    combos.sort_by_key(|c| combo_key(c, ctx.tasks));
                    for c in combos {
                        attempts += 1;
                        let placed = can_schedule_in_place(
                            t,
                            &c,
                            &s,
                            alpha_min,
                            ctx.workers,
                            ctx.tasks,
                            ctx.now,
                            ctx.config,
                        )?;
                        if placed.is_some() {
                            for id in &c {
                                s.remove(id);
                                queue.insert(id.clone());
                                canceled.push(id.clone());
                            }
                            break 'search;
                        }
                        if attempts >= max_attempts {
                            break 'search;
                        }
                        tried.insert(c);
                    }
                }
                size += 1;
            }
        }

        // Schedule t on top of the (possibly reduced) current schedule.
        let workers_cur = workers_with_calendars(ctx.workers, &s, ctx.tasks);
        let sub_ctx = PlanContext {
            tasks: ctx.tasks,
            workers: &workers_cur,
            weights: ctx.weights,
            params: ctx.params,
            config: &SchedulerConfig {
                beam_width: 1,
                ..ctx.config.clone()
            },
            now: ctx.now,
        };
        let reborrowed: Option<&mut dyn QueryOracle> = match oracle {
            Some(ref mut o) => Some(&mut **o),
            None => None,
        };
        let planned = schedule(
            core::slice::from_ref(&t_id),
            &s,
            profiles,
            reborrowed,
            &sub_ctx,
        )?;
        s = planned
            .into_iter()
            .next()
            .map(|p| p.schedule)
            .unwrap_or(s);
        if !s.assignments.contains_key(&t_id) {
            unplaced.push(t_id);
        }
    }

    canceled.sort();
    canceled.dedup();
    unplaced.sort();
    Ok(RescheduleOutcome {
        schedule: s,
        unplaced,
        canceled,
    })
}
