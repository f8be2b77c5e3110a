//! Multi-path conditional planner: team enumeration, earliest feasible
//! scheduling options, K-best tree search over task assignments and a
//! standalone feasibility checker.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::calendar::{earliest_team_start, CalendarEntry, CalendarView};
use crate::criteria::{
    score_schedule, CriteriaError, CriteriaParams, Query, WeightVector,
};
use crate::domain::{
    Interval, Schedule, TaskId, TaskSpec, Timestep, Tso, WorkerId, WorkerState,
};
use crate::profiling::{ObservationRecord, ProfileStore};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchedulerConfig {
    /// Maximum number of schedule paths kept alive after each task.
    pub beam_width: usize,
    /// Window length, in steps past the current one, that feasible-TSO
    /// search will consider for a task's start.
    pub planning_horizon: Timestep,
    /// Guard against combinatorial blow-up in team enumeration.
    pub team_enumeration_cap: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            beam_width: 3,
            planning_horizon: 200,
            team_enumeration_cap: 10_000,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum SchedulerError {
    TeamEnumerationCap { task: TaskId, combinations: usize, cap: usize },
    Criteria(CriteriaError),
}

impl fmt::Display for SchedulerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerError::TeamEnumerationCap {
                task,
                combinations,
                cap,
            } => write!(
                f,
                "task {task}: {combinations} team combinations exceed the cap of {cap}"
            ),
            SchedulerError::Criteria(e) => write!(f, "criteria evaluation failed: {e}"),
        }
    }
}

impl From<CriteriaError> for SchedulerError {
    fn from(e: CriteriaError) -> Self {
        SchedulerError::Criteria(e)
    }
}

/// Answers criterion-8 missing-information queries during planning.
/// Returning `None` leaves the attribute unknown (the default value is
/// used); returning an observation gets it ingested before re-scoring.
pub trait QueryOracle {
    fn answer(&mut self, query: &Query, now: Timestep) -> Option<ObservationRecord>;
}

/// A schedule together with its aggregated score.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct PlannedSchedule {
    pub schedule: Schedule,
    pub score: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Duration,
    Deadline,
    Requirements,
    Workload,
    FulltimeOverlap,
    TeamConstraint,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub task: TaskId,
    pub detail: String,
}

/// All teams satisfying the task's role requirements: exactly the
/// required count per role, containing every matching must-include worker
/// and no excluded worker. Workers are sorted by id, combinations emitted
/// in lexicographic order.
pub fn enumerate_teams(
    task: &TaskSpec,
    workers: &BTreeMap<WorkerId, WorkerState>,
    cap: usize,
) -> Result<Vec<BTreeSet<WorkerId>>, SchedulerError> {
    let mut per_role: Vec<Vec<BTreeSet<WorkerId>>> = Vec::new();
    let mut total: usize = 1;
    for (role, &count) in &task.required_roles {
        let candidates: Vec<&WorkerId> = workers
            .values()
            .filter(|w| &w.role == role && !task.must_exclude.contains(&w.id))
            .map(|w| &w.id)
            .collect();
        let forced: Vec<&WorkerId> = candidates
            .iter()
            .copied()
            .filter(|id| task.must_include.contains(id))
            .collect();
        let count = count as usize;
        if candidates.len() < count || forced.len() > count {
            return Ok(Vec::new());
        }
        let free: Vec<&WorkerId> = candidates
            .iter()
            .copied()
            .filter(|id| !task.must_include.contains(id))
            .collect();
        let choose = count - forced.len();
        let options = combinations(&free, choose)
            .into_iter()
            .map(|mut combo| {
                combo.extend(forced.iter().copied());
                combo.into_iter().cloned().collect::<BTreeSet<WorkerId>>()
            })
            .collect::<Vec<_>>();
        total = total.saturating_mul(options.len());
        if total > cap {
            return Err(SchedulerError::TeamEnumerationCap {
                task: task.id.clone(),
                combinations: total,
                cap,
            });
        }
        per_role.push(options);
    }

    // Cross product across roles, preserving lexicographic order.
    let mut teams: Vec<BTreeSet<WorkerId>> = alloc::vec![BTreeSet::new()];
    for options in per_role {
        let mut next = Vec::with_capacity(teams.len() * options.len());
        for base in &teams {
            for option in &options {
                let mut team = base.clone();
                team.extend(option.iter().cloned());
                next.push(team);
            }
        }
        teams = next;
    }
    Ok(teams)
}

fn combinations<'a>(items: &[&'a WorkerId], k: usize) -> Vec<Vec<&'a WorkerId>> {
    if k > items.len() {
        return Vec::new();
    }
    if k == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut indices: Vec<usize> = (0..k).collect();
    loop {
        out.push(indices.iter().map(|&i| items[i]).collect());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if indices[i] != i + items.len() - k {
                break;
            }
        }
        indices[i] += 1;
        for j in i + 1..k {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

/// Per-worker calendar entries contributed by a schedule overlay.
fn overlay_entries(
    overlay: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
) -> BTreeMap<WorkerId, Vec<CalendarEntry>> {
    let mut map: BTreeMap<WorkerId, Vec<CalendarEntry>> = BTreeMap::new();
    for (task_id, tso) in overlay.iter() {
        if let Some(task) = tasks.get(task_id) {
            for member in &tso.team {
                map.entry(member.clone()).or_default().push(CalendarEntry {
                    task: task_id.clone(),
                    interval: tso.interval,
                    timing: task.timing,
                    workload_rate: task.workload_rate(),
                });
            }
        }
    }
    map
}

/// One TSO per enumerated team: its earliest feasible start against the
/// workers' calendars augmented with `overlay`. Teams with no feasible
/// start in the horizon are omitted. Ordered by start ascending, ties by
/// enumeration order.
pub fn feasible_tsos(
    task: &TaskSpec,
    workers: &BTreeMap<WorkerId, WorkerState>,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    overlay: &Schedule,
    now: Timestep,
    cfg: &SchedulerConfig,
) -> Result<Vec<Tso>, SchedulerError> {
    let teams = enumerate_teams(task, workers, cfg.team_enumeration_cap)?;
    let extra = overlay_entries(overlay, tasks);
    let horizon_end = now.saturating_add(cfg.planning_horizon);

    let mut options: Vec<(Timestep, usize, Tso)> = Vec::new();
    for (order, team) in teams.into_iter().enumerate() {
        let mut cals: Vec<CalendarView> = Vec::with_capacity(team.len());
        let mut capacities: Vec<f64> = Vec::with_capacity(team.len());
        for member in &team {
            let w = &workers[member];
            let mut cal = w.calendar.clone();
            if let Some(entries) = extra.get(member) {
                cal.entries.extend(entries.iter().cloned());
            }
            cals.push(cal);
            capacities.push(w.work_capacity);
        }
        let cal_refs: Vec<&CalendarView> = cals.iter().collect();
        if let Some(alpha) = earliest_team_start(&cal_refs, task, &capacities, now, horizon_end) {
            options.push((
                alpha,
                order,
                Tso {
                    team,
                    interval: Interval::new(alpha, alpha + task.duration),
                },
            ));
        }
    }
    options.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(options.into_iter().map(|(_, _, tso)| tso).collect())
}

struct Leaf {
    schedule: Schedule,
    /// Assignments added during this planning run, i.e. not yet present
    /// in the workers' calendars.
    added: Schedule,
    birth_order: u64,
    score: f64,
}

fn score_leaves(
    leaves: &mut [Leaf],
    scoring_tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    profiles: &ProfileStore,
    params: &CriteriaParams,
    weights: &WeightVector,
) -> Result<Vec<Query>, SchedulerError> {
    let mut queries: Vec<Query> = Vec::new();
    for leaf in leaves.iter_mut() {
        let (v, scores) = score_schedule(
            &leaf.schedule,
            scoring_tasks,
            workers,
            profiles,
            params,
            weights,
        )?;
        leaf.score = v;
        for score in scores {
            queries.extend(score.queries_raised);
        }
    }
    queries.sort();
    queries.dedup();
    Ok(queries)
}

/// Algorithm inputs that stay fixed across one planning run.
pub struct PlanContext<'a> {
    pub tasks: &'a BTreeMap<TaskId, TaskSpec>,
    pub workers: &'a BTreeMap<WorkerId, WorkerState>,
    pub weights: &'a WeightVector,
    pub params: &'a CriteriaParams,
    pub config: &'a SchedulerConfig,
    pub now: Timestep,
}

/// K-best conditional planning over the batch.
///
/// Tasks are processed in priority order (ties by arrival, then id); each
/// beam leaf spawns one child per feasible TSO conditioned on the leaf's
/// own additions, leaves without options survive unchanged, and after
/// each task the leaves are rescored and pruned to the best `K`.
/// Criterion-8 queries raised during scoring are forwarded to the oracle
/// and answered observations are ingested before the final scoring pass.
pub fn schedule(
    batch: &[TaskId],
    s_prev: &Schedule,
    profiles: &mut ProfileStore,
    mut oracle: Option<&mut dyn QueryOracle>,
    ctx: &PlanContext<'_>,
) -> Result<Vec<PlannedSchedule>, SchedulerError> {
    debug_assert!(ctx.config.beam_width >= 1);

    // Criteria see the batch plus whatever the previous schedule carries.
    let mut scoring_tasks: BTreeMap<TaskId, TaskSpec> = BTreeMap::new();
    for id in batch.iter().chain(s_prev.assignments.keys()) {
        if let Some(t) = ctx.tasks.get(id) {
            scoring_tasks.insert(id.clone(), t.clone());
        }
    }

    let mut order: Vec<&TaskSpec> = batch
        .iter()
        .filter_map(|id| ctx.tasks.get(id))
        .collect();
    order.sort_by(|a, b| {
        b.priority
            .cmp(&a.priority)
            .then(a.arrival_time.cmp(&b.arrival_time))
            .then(a.id.cmp(&b.id))
    });

    let mut leaves = alloc::vec![Leaf {
        schedule: s_prev.clone(),
        added: Schedule::new(),
        birth_order: 0,
        score: 0.0,
    }];
    let mut next_birth: u64 = 1;

    for task in order {
        let mut children: Vec<Leaf> = Vec::new();
        for leaf in &leaves {
            let tsos = feasible_tsos(
                task,
                ctx.workers,
                &scoring_tasks,
                &leaf.added,
                ctx.now,
                ctx.config,
            )?;
            if tsos.is_empty() {
                // The task stays pending on this branch.
                children.push(Leaf {
                    schedule: leaf.schedule.clone(),
                    added: leaf.added.clone(),
                    birth_order: leaf.birth_order,
                    score: leaf.score,
                });
            } else {
                for tso in tsos {
                    let mut schedule = leaf.schedule.clone();
                    let mut added = leaf.added.clone();
                    schedule.insert(task.id.clone(), tso.clone());
                    added.insert(task.id.clone(), tso);
                    children.push(Leaf {
                        schedule,
                        added,
                        birth_order: next_birth,
                        score: 0.0,
                    });
                    next_birth += 1;
                }
            }
        }

        let queries = score_leaves(
            &mut children,
            &scoring_tasks,
            ctx.workers,
            profiles,
            ctx.params,
            ctx.weights,
        )?;
        if !queries.is_empty() {
            if let Some(oracle) = oracle.as_deref_mut() {
                let mut answered = false;
                for query in &queries {
                    if let Some(obs) = oracle.answer(query, ctx.now) {
                        // Validated on emission; ingest cannot fail here.
                        let _ = profiles.ingest(obs, ctx.now);
                        answered = true;
                    }
                }
                if answered {
                    score_leaves(
                        &mut children,
                        &scoring_tasks,
                        ctx.workers,
                        profiles,
                        ctx.params,
                        ctx.weights,
                    )?;
                }
            }
        }

        children.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.birth_order.cmp(&b.birth_order))
        });
        children.truncate(ctx.config.beam_width);
        leaves = children;
    }

    if leaves.len() == 1 && leaves[0].birth_order == 0 {
        // Nothing was scheduled; still report the root's score.
        score_leaves(
            &mut leaves,
            &scoring_tasks,
            ctx.workers,
            profiles,
            ctx.params,
            ctx.weights,
        )?;
    }

    Ok(leaves
        .into_iter()
        .map(|l| PlannedSchedule {
            schedule: l.schedule,
            score: l.score,
        })
        .collect())
}

/// Exhaustive per-step, per-worker feasibility check. An empty result
/// means the schedule is feasible; deadline violations are reported even
/// though the planner never enforces them.
pub fn check_feasibility(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
) -> Vec<Violation> {
    use alloc::format;
    const EPS: f64 = 1e-9;

    let mut violations = Vec::new();

    for (task_id, tso) in s.iter() {
        let Some(task) = tasks.get(task_id) else {
            violations.push(Violation {
                kind: ViolationKind::Requirements,
                task: task_id.clone(),
                detail: String::from("assignment references an unknown task"),
            });
            continue;
        };
        if tso.interval.len() != task.duration {
            violations.push(Violation {
                kind: ViolationKind::Duration,
                task: task_id.clone(),
                detail: format!(
                    "interval [{}, {}) does not span duration {}",
                    tso.interval.alpha, tso.interval.beta, task.duration
                ),
            });
        }
        if let Some(deadline) = task.deadline {
            if tso.interval.beta > deadline {
                violations.push(Violation {
                    kind: ViolationKind::Deadline,
                    task: task_id.clone(),
                    detail: format!("ends at {} past deadline {deadline}", tso.interval.beta),
                });
            }
        }

        // Role counts must match exactly.
        let mut role_counts: BTreeMap<&str, u32> = BTreeMap::new();
        let mut unknown_member = false;
        for member in &tso.team {
            match workers.get(member) {
                Some(w) => *role_counts.entry(w.role.as_str()).or_default() += 1,
                None => {
                    unknown_member = true;
                    violations.push(Violation {
                        kind: ViolationKind::Requirements,
                        task: task_id.clone(),
                        detail: format!("team member {member} is not a known worker"),
                    });
                }
            }
        }
        if !unknown_member {
            let required: BTreeMap<&str, u32> = task
                .required_roles
                .iter()
                .map(|(r, &c)| (r.as_str(), c))
                .collect();
            if role_counts != required {
                violations.push(Violation {
                    kind: ViolationKind::Requirements,
                    task: task_id.clone(),
                    detail: format!("team roles {role_counts:?} != required {required:?}"),
                });
            }
        }

        for included in &task.must_include {
            let role_matches = workers
                .get(included)
                .map(|w| task.required_roles.contains_key(&w.role))
                .unwrap_or(false);
            if role_matches && !tso.team.contains(included) {
                violations.push(Violation {
                    kind: ViolationKind::TeamConstraint,
                    task: task_id.clone(),
                    detail: format!("must-include worker {included} missing from team"),
                });
            }
        }
        for excluded in &task.must_exclude {
            if tso.team.contains(excluded) {
                violations.push(Violation {
                    kind: ViolationKind::TeamConstraint,
                    task: task_id.clone(),
                    detail: format!("must-exclude worker {excluded} present in team"),
                });
            }
        }
    }

    // Per-worker, per-step workload and full-time exclusivity.
    let mut per_worker: BTreeMap<&WorkerId, Vec<(&TaskId, &TaskSpec, Interval)>> = BTreeMap::new();
    for (task_id, tso) in s.iter() {
        if let Some(task) = tasks.get(task_id) {
            for member in &tso.team {
                per_worker
                    .entry(member)
                    .or_default()
                    .push((task_id, task, tso.interval));
            }
        }
    }
    for (worker_id, entries) in per_worker {
        let Some(worker) = workers.get(worker_id) else {
            continue;
        };
        let lo = entries.iter().map(|e| e.2.alpha).min().unwrap_or(0);
        let hi = entries.iter().map(|e| e.2.beta).max().unwrap_or(0);
        for step in lo..hi {
            let active: Vec<_> = entries.iter().filter(|e| e.2.contains(step)).collect();
            let load: f64 = active.iter().map(|e| e.1.workload_rate()).sum();
            if load > worker.work_capacity + EPS {
                let task_id = active.last().expect("nonempty").0;
                violations.push(Violation {
                    kind: ViolationKind::Workload,
                    task: (*task_id).clone(),
                    detail: format!(
                        "worker {worker_id} carries load {load:.3} > capacity {:.3} at step {step}",
                        worker.work_capacity
                    ),
                });
            }
            let fulltime: Vec<_> = active
                .iter()
                .filter(|e| e.1.timing == crate::domain::Timing::FullTime)
                .collect();
            if fulltime.len() > 1 {
                let task_id = fulltime.last().expect("nonempty").0;
                violations.push(Violation {
                    kind: ViolationKind::FulltimeOverlap,
                    task: (*task_id).clone(),
                    detail: format!(
                        "worker {worker_id} has {} overlapping full-time tasks at step {step}",
                        fulltime.len()
                    ),
                });
            }
        }
    }

    // One violation per (kind, task) is enough for callers.
    violations.sort_by(|a, b| a.kind.cmp(&b.kind).then(a.task.cmp(&b.task)));
    violations.dedup_by(|a, b| a.kind == b.kind && a.task == b.task);
    violations
}

/// Rebuild worker calendars so they mirror exactly the given schedule.
pub fn workers_with_calendars(
    workers: &BTreeMap<WorkerId, WorkerState>,
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
) -> BTreeMap<WorkerId, WorkerState> {
    let mut out = workers.clone();
    for w in out.values_mut() {
        w.calendar = CalendarView::new();
    }
    for (task_id, tso) in s.iter() {
        if let Some(task) = tasks.get(task_id) {
            for member in &tso.team {
                if let Some(w) = out.get_mut(member) {
                    w.calendar.entries.push(CalendarEntry {
                        task: task_id.clone(),
                        interval: tso.interval,
                        timing: task.timing,
                        workload_rate: task.workload_rate(),
                    });
                }
            }
        }
    }
    out
}
