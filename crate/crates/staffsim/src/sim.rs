//! Closed-loop discrete-time simulator: generated workers and tasks,
//! Poisson arrivals, noisy feedback channels feeding the profiling store,
//! and per-step metric logging.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use staffsim_core::calendar::earliest_team_start;
use staffsim_core::criteria::{
    eval_hard_skill_match, eval_soft_skill_diversity, eval_teammate_compat, AttributeSource,
    CriteriaParams, Query,
};
use staffsim_core::domain::{round_to_level, HistoryEntry, Scale, Seniority};
use staffsim_core::profiling::{
    AttributeKey, ObservationRecord, ObservationSource, ProfileStore, REVIEW_OBSERVER,
};
use staffsim_core::scheduler::{
    check_feasibility, enumerate_teams, schedule, workers_with_calendars, PlanContext, QueryOracle,
    SchedulerConfig, SchedulerError, ViolationKind,
};
use staffsim_core::{
    Interval, PreferenceLevel, Schedule, SkillLevel, TaskId, TaskSpec, Timestep, Timing,
    TrueAttributes, Tso, WorkerId, WorkerState,
};

use crate::config::EnvConfig;
use crate::metrics::{MetricRow, OptimalitySample};
use crate::rng::{gaussian, poisson, stream, BiasTable, RngStreams};

/// Full simulator state; serializable so runs can be snapshotted and
/// resumed bit-exactly.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SimState {
    pub config: EnvConfig,
    pub clock: Timestep,
    pub workers: BTreeMap<WorkerId, WorkerState>,
    pub truth: BTreeMap<WorkerId, TrueAttributes>,
    pub tasks: BTreeMap<TaskId, TaskSpec>,
    pub pending: BTreeSet<TaskId>,
    /// Confirmed assignments that have not completed yet.
    pub schedule: Schedule,
    pub completed: BTreeMap<TaskId, Tso>,
    /// Oracle outcome recorded when the task was confirmed.
    pub outcomes: BTreeMap<TaskId, f64>,
    pub profiles: ProfileStore,
    pub bias: BiasTable,
    pub rng: RngStreams,
    pub next_task_seq: u64,
    /// (worker, skill) self-evaluation questions already spent.
    pub asked: BTreeSet<(WorkerId, String)>,
    pub metrics: Vec<MetricRow>,
    pub samples: Vec<OptimalitySample>,
}

fn seniority_tag(s: Seniority) -> &'static str {
    match s {
        Seniority::Junior => "j",
        Seniority::Senior => "s",
    }
}

fn sample_skill(rng: &mut ChaCha8Rng, seniority: Seniority) -> SkillLevel {
    let (lo, hi) = match seniority {
        Seniority::Junior => (1, 4),
        Seniority::Senior => (3, 6),
    };
    SkillLevel::new(rng.random_range(lo..=hi)).expect("in scale")
}

fn sample_pref(rng: &mut ChaCha8Rng) -> PreferenceLevel {
    PreferenceLevel::new(rng.random_range(-2..=2)).expect("in scale")
}

/// Deterministic initial environment: workers per (role, seniority) with
/// seniority-conditioned salaries, capacities and skill levels, and every
/// preference sampled uniformly over its five levels.
pub fn generate_environment(cfg: &EnvConfig) -> SimState {
    let mut env = stream(cfg.seed, "env");
    let mut workers = BTreeMap::new();
    let mut truth: BTreeMap<WorkerId, TrueAttributes> = BTreeMap::new();

    for role in &cfg.roles {
        for seniority in [Seniority::Junior, Seniority::Senior] {
            for i in 1..=cfg.workers_per_role_per_seniority {
                let id = WorkerId::new(format!("{role}_{}{i}", seniority_tag(seniority)));
                let (salary, capacity) = match seniority {
                    Seniority::Junior => (
                        env.random_range(8.0..12.0),
                        env.random_range(0.8..1.2),
                    ),
                    Seniority::Senior => (
                        env.random_range(16.0..24.0),
                        env.random_range(1.2..1.8),
                    ),
                };
                let mut attrs = TrueAttributes::default();
                for skill in cfg.hard_skills_of(role) {
                    attrs.hard_skills.insert(skill, sample_skill(&mut env, seniority));
                }
                for skill in &cfg.soft_skill_names {
                    attrs
                        .soft_skills
                        .insert(skill.clone(), sample_skill(&mut env, seniority));
                }
                for topic in &cfg.topic_names {
                    attrs
                        .task_preferences
                        .insert(topic.clone(), sample_pref(&mut env));
                }
                truth.insert(id.clone(), attrs);
                workers.insert(
                    id.clone(),
                    WorkerState {
                        id,
                        role: role.clone(),
                        seniority,
                        salary,
                        work_capacity: capacity,
                        calendar: Default::default(),
                        history: vec![],
                    },
                );
            }
        }
    }

    // Teammate preferences over ordered pairs; A's view of B is sampled
    // independently of B's view of A.
    let ids: Vec<WorkerId> = workers.keys().cloned().collect();
    for a in &ids {
        for b in &ids {
            if a == b {
                continue;
            }
            let level = sample_pref(&mut env);
            truth
                .get_mut(a)
                .expect("known worker")
                .teammate_preferences
                .insert(b.clone(), level);
        }
    }

    SimState {
        clock: 0,
        workers,
        truth,
        tasks: BTreeMap::new(),
        pending: BTreeSet::new(),
        schedule: Schedule::new(),
        completed: BTreeMap::new(),
        outcomes: BTreeMap::new(),
        profiles: ProfileStore::new(
            cfg.gamma,
            staffsim_core::profiling::ObserverWeights::default(),
        ),
        bias: BiasTable::new(cfg.seed, cfg.sigma_b, cfg.bias_off_at),
        rng: RngStreams::new(cfg.seed),
        next_task_seq: 1,
        asked: BTreeSet::new(),
        metrics: vec![],
        samples: vec![],
        config: cfg.clone(),
    }
}

fn pick_distinct<'a, T>(rng: &mut ChaCha8Rng, pool: &'a [T], count: usize) -> Vec<&'a T> {
    let count = count.min(pool.len());
    rand::seq::index::sample(rng, pool.len(), count)
        .into_iter()
        .map(|i| &pool[i])
        .collect()
}

/// Draw a fresh pseudo-random task at the current clock.
pub fn generate_task(state: &mut SimState) -> TaskSpec {
    let cfg = &state.config;
    let rng = &mut state.rng.task_content;
    let id = TaskId::new(format!("t{:05}", state.next_task_seq));
    state.next_task_seq += 1;

    let team_size = rng.random_range(1..=cfg.max_team_size);
    let mut required_roles: BTreeMap<String, u32> = BTreeMap::new();
    for _ in 0..team_size {
        let role = &cfg.roles[rng.random_range(0..cfg.roles.len())];
        *required_roles.entry(role.clone()).or_insert(0) += 1;
    }

    let mut required_skills: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for role in required_roles.keys() {
        let pool = cfg.hard_skills_of(role);
        let count = rng.random_range(1..=3usize);
        let subset: BTreeSet<String> =
            pick_distinct(rng, &pool, count).into_iter().cloned().collect();
        required_skills.insert(role.clone(), subset);
    }

    let topic_count = rng.random_range(1..=3usize);
    let topics: BTreeSet<String> = pick_distinct(rng, &cfg.topic_names, topic_count)
        .into_iter()
        .cloned()
        .collect();

    let [lo, hi] = cfg.duration_range;
    let duration = rng.random_range(lo..=hi);
    let min_capacity = state
        .workers
        .values()
        .map(|w| w.work_capacity)
        .fold(f64::INFINITY, f64::min);
    let rate = min_capacity * rng.random_range(0.1..=1.0);
    let priority = rng.random_range(1..=cfg.p_max);
    let timing = if rng.random::<f64>() < cfg.fulltime_prob {
        Timing::FullTime
    } else {
        Timing::PartTime
    };

    TaskSpec {
        id,
        arrival_time: state.clock,
        priority,
        required_roles,
        required_skills,
        topics,
        duration,
        workload: rate * duration as f64,
        must_include: BTreeSet::new(),
        must_exclude: BTreeSet::new(),
        deadline: None,
        timing,
    }
}

/// Observed level of a true skill: true + fixed observer bias + fresh
/// noise + reconstruction noise, rounded and clamped to the scale.
/// Performance reviews pass `unbiased = true`; the bias table also
/// zeroes itself once the unbiased-feedback regime starts.
#[allow(clippy::too_many_arguments)]
pub fn corrupt_skill_level(
    true_level: u8,
    observer: &WorkerId,
    target: &WorkerId,
    skill: &str,
    now: Timestep,
    unbiased: bool,
    bias: &mut BiasTable,
    noise: &mut ChaCha8Rng,
    sigma_v: f64,
    sigma_r: f64,
) -> i8 {
    let b = if unbiased {
        0.0
    } else {
        bias.bias(observer, target, skill, now)
    };
    let v = gaussian(noise, sigma_v);
    let r = gaussian(noise, sigma_r);
    round_to_level(f64::from(true_level) + b + v + r, Scale::Skill)
}

fn reconstruct_pref(true_level: i8, noise: &mut ChaCha8Rng, sigma_r: f64) -> i8 {
    round_to_level(f64::from(true_level) + gaussian(noise, sigma_r), Scale::Preference)
}

/// Whether the worker would push back on the assignment. Aversion is the
/// negative part of the mean true preference over the task's topics.
pub fn decide_acceptance(
    worker: &WorkerId,
    task: &TaskSpec,
    truth: &BTreeMap<WorkerId, TrueAttributes>,
    reject_scale: f64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let prefs = &truth[worker].task_preferences;
    let mean: f64 = if task.topics.is_empty() {
        0.0
    } else {
        task.topics
            .iter()
            .map(|t| prefs.get(t).map(|p| f64::from(p.value())).unwrap_or(0.0))
            .sum::<f64>()
            / task.topics.len() as f64
    };
    let aversion = (-mean).max(0.0);
    let p_reject = reject_scale * aversion / 2.0;
    rng.random::<f64>() >= p_reject
}

/// Proposal feedback: the worker states their true preference for each
/// task topic while motivating the decision.
#[allow(clippy::too_many_arguments)]
pub fn emit_task_proposal_feedback(
    worker: &WorkerId,
    task: &TaskSpec,
    accepted: bool,
    truth: &BTreeMap<WorkerId, TrueAttributes>,
    subsample: f64,
    now: Timestep,
    noise: &mut ChaCha8Rng,
    acceptance: &mut ChaCha8Rng,
    sigma_r: f64,
) -> Vec<ObservationRecord> {
    let decision = if accepted { "accept" } else { "reject" };
    let prefs = &truth[worker].task_preferences;
    let mut out = Vec::new();
    for topic in &task.topics {
        if acceptance.random::<f64>() >= subsample {
            continue;
        }
        let Some(level) = prefs.get(topic) else {
            continue;
        };
        out.push(ObservationRecord {
            target: worker.clone(),
            observer: worker.clone(),
            attribute: AttributeKey::task_pref(topic.clone()),
            level: reconstruct_pref(level.value(), noise, sigma_r),
            timestamp: now,
            source: ObservationSource::TaskProposal,
            provenance: format!("proposal|{}|{decision}", task.id),
        });
    }
    out
}

/// Completion review: an unbiased (still noisy) reading of each member's
/// required skills, recorded under the review pseudo-observer.
#[allow(clippy::too_many_arguments)]
pub fn emit_performance_review(
    task: &TaskSpec,
    team: &BTreeSet<WorkerId>,
    truth: &BTreeMap<WorkerId, TrueAttributes>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    now: Timestep,
    bias: &mut BiasTable,
    noise: &mut ChaCha8Rng,
    sigma_v: f64,
    sigma_r: f64,
) -> Vec<ObservationRecord> {
    let reviewer = WorkerId::new(REVIEW_OBSERVER);
    let mut out = Vec::new();
    for member in team {
        let Some(worker) = workers.get(member) else {
            continue;
        };
        let Some(required) = task.required_skills.get(&worker.role) else {
            continue;
        };
        for skill in required {
            let Some(level) = truth[member].hard_skills.get(skill) else {
                continue;
            };
            let observed = corrupt_skill_level(
                level.value(),
                &reviewer,
                member,
                skill,
                now,
                true,
                bias,
                noise,
                sigma_v,
                sigma_r,
            );
            out.push(ObservationRecord {
                target: member.clone(),
                observer: reviewer.clone(),
                attribute: AttributeKey::hard_skill(skill.clone()),
                level: observed,
                timestamp: now,
                source: ObservationSource::PerformanceReview,
                provenance: format!("review|{}", task.id),
            });
        }
    }
    out
}

/// Peer feedback at completion: for every ordered (reviewer, reviewed)
/// pair, a few skill readings corrupted by the reviewer's personal bias,
/// plus the reviewer's true preference about the colleague.
#[allow(clippy::too_many_arguments)]
pub fn emit_peer_feedback(
    task: &TaskSpec,
    team: &BTreeSet<WorkerId>,
    truth: &BTreeMap<WorkerId, TrueAttributes>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    cfg: &EnvConfig,
    now: Timestep,
    bias: &mut BiasTable,
    noise: &mut ChaCha8Rng,
    content: &mut ChaCha8Rng,
) -> Vec<ObservationRecord> {
    let mut out = Vec::new();
    for reviewer in team {
        for reviewed in team {
            if reviewer == reviewed {
                continue;
            }
            let Some(worker) = workers.get(reviewed) else {
                continue;
            };
            let attrs = &truth[reviewed];
            // Candidate skills: the reviewed worker's hard skills plus
            // all soft skills, tagged by kind.
            let mut pool: Vec<(bool, String)> = cfg
                .hard_skills_of(&worker.role)
                .into_iter()
                .map(|s| (true, s))
                .collect();
            pool.extend(cfg.soft_skill_names.iter().map(|s| (false, s.clone())));
            let count = content.random_range(1..=3usize);
            for (is_hard, skill) in pick_distinct(content, &pool, count) {
                let level = if *is_hard {
                    attrs.hard_skills.get(skill).map(|l| l.value())
                } else {
                    attrs.soft_skills.get(skill).map(|l| l.value())
                };
                let Some(level) = level else { continue };
                let observed = corrupt_skill_level(
                    level,
                    reviewer,
                    reviewed,
                    skill,
                    now,
                    false,
                    bias,
                    noise,
                    cfg.sigma_v,
                    cfg.sigma_r,
                );
                let attribute = if *is_hard {
                    AttributeKey::hard_skill(skill.clone())
                } else {
                    AttributeKey::soft_skill(skill.clone())
                };
                out.push(ObservationRecord {
                    target: reviewed.clone(),
                    observer: reviewer.clone(),
                    attribute,
                    level: observed,
                    timestamp: now,
                    source: ObservationSource::PeerFeedback,
                    provenance: format!("peer|{}|{reviewer}", task.id),
                });
            }
            // How much the reviewer enjoys working with the colleague;
            // recorded on the reviewer's own profile.
            let pref = truth[reviewer]
                .teammate_preferences
                .get(reviewed)
                .map(|p| p.value())
                .unwrap_or(0);
            out.push(ObservationRecord {
                target: reviewer.clone(),
                observer: reviewer.clone(),
                attribute: AttributeKey::teammate_pref(reviewed),
                level: reconstruct_pref(pref, noise, cfg.sigma_r),
                timestamp: now,
                source: ObservationSource::PeerFeedback,
                provenance: format!("peer|{}|{reviewer}", task.id),
            });
        }
    }
    out
}

/// Answers planner queries by asking the worker directly. Each (worker,
/// skill) is asked at most once per run.
pub struct SelfEvalOracle<'a> {
    pub truth: &'a BTreeMap<WorkerId, TrueAttributes>,
    pub bias: &'a mut BiasTable,
    pub noise: &'a mut ChaCha8Rng,
    pub asked: &'a mut BTreeSet<(WorkerId, String)>,
    pub questions: &'a mut usize,
    pub sigma_v: f64,
    pub sigma_r: f64,
}

impl QueryOracle for SelfEvalOracle<'_> {
    fn answer(&mut self, query: &Query, now: Timestep) -> Option<ObservationRecord> {
        let key = (query.worker.clone(), query.skill.clone());
        if self.asked.contains(&key) {
            return None;
        }
        let level = self
            .truth
            .get(&query.worker)?
            .hard_skills
            .get(&query.skill)?
            .value();
        self.asked.insert(key);
        *self.questions += 1;
        let observed = corrupt_skill_level(
            level,
            &query.worker,
            &query.worker,
            &query.skill,
            now,
            false,
            self.bias,
            self.noise,
            self.sigma_v,
            self.sigma_r,
        );
        Some(ObservationRecord {
            target: query.worker.clone(),
            observer: query.worker.clone(),
            attribute: AttributeKey::hard_skill(query.skill.clone()),
            level: observed,
            timestamp: now,
            source: ObservationSource::SelfEval,
            provenance: format!("self_eval|{}", query.skill),
        })
    }
}

/// Ground-truth attribute view used only by the oracle.
pub struct TruthSource<'a>(pub &'a BTreeMap<WorkerId, TrueAttributes>);

impl AttributeSource for TruthSource<'_> {
    fn hard_skill(&self, worker: &WorkerId, skill: &str) -> Option<f64> {
        Some(f64::from(self.0.get(worker)?.hard_skills.get(skill)?.value()))
    }
    fn soft_skill(&self, worker: &WorkerId, skill: &str) -> Option<f64> {
        Some(f64::from(self.0.get(worker)?.soft_skills.get(skill)?.value()))
    }
    fn task_pref(&self, worker: &WorkerId, topic: &str) -> Option<f64> {
        Some(f64::from(self.0.get(worker)?.task_preferences.get(topic)?.value()))
    }
    fn teammate_pref(&self, observer: &WorkerId, other: &WorkerId) -> Option<f64> {
        Some(f64::from(
            self.0.get(observer)?.teammate_preferences.get(other)?.value(),
        ))
    }
}

/// True-attribute score of one team on one task: mean of the diversity,
/// compatibility and hard-skill criteria.
pub fn outcome_of_team(
    task: &TaskSpec,
    team: &BTreeSet<WorkerId>,
    truth: &BTreeMap<WorkerId, TrueAttributes>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    params: &CriteriaParams,
) -> f64 {
    let mut s = Schedule::new();
    s.insert(
        task.id.clone(),
        Tso {
            team: team.clone(),
            interval: Interval::new(task.arrival_time, task.arrival_time + task.duration),
        },
    );
    let tasks = BTreeMap::from([(task.id.clone(), task.clone())]);
    let src = TruthSource(truth);
    let c6 = eval_soft_skill_diversity(&s, &src, params).value;
    let c7 = eval_teammate_compat(&s, &src).value;
    let c8 = eval_hard_skill_match(&s, &tasks, workers, &src).value;
    (c6 + c7 + c8) / 3.0
}

/// Outcome of the chosen team and its ratio to the best outcome among all
/// teams that had a feasible start at assignment time, given the other
/// confirmed assignments in `context`.
#[allow(clippy::too_many_arguments)]
pub fn task_outcome_oracle(
    task: &TaskSpec,
    chosen: &Tso,
    context: &Schedule,
    truth: &BTreeMap<WorkerId, TrueAttributes>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    now: Timestep,
    cfg: &SchedulerConfig,
    params: &CriteriaParams,
) -> (f64, f64) {
    let outcome = outcome_of_team(task, &chosen.team, truth, workers, params);
    let with_cal = workers_with_calendars(workers, context, tasks);
    let teams = enumerate_teams(task, workers, cfg.team_enumeration_cap).unwrap_or_default();
    let horizon = now.saturating_add(cfg.planning_horizon);
    let feasible: Vec<&BTreeSet<WorkerId>> = teams
        .iter()
        .filter(|team| {
            let cals: Vec<_> = team.iter().map(|m| &with_cal[m].calendar).collect();
            let caps: Vec<f64> = team.iter().map(|m| with_cal[m].work_capacity).collect();
            earliest_team_start(&cals, task, &caps, now, horizon).is_some()
        })
        .collect();
    if feasible.len() <= 1 {
        return (outcome, 1.0);
    }
    let best = feasible
        .iter()
        .map(|team| outcome_of_team(task, team, truth, workers, params))
        .fold(f64::NEG_INFINITY, f64::max);
    if best <= 0.0 {
        (outcome, 1.0)
    } else {
        (outcome, (outcome / best).clamp(0.0, 1.0))
    }
}

impl SimState {
    pub fn criteria_params(&self) -> CriteriaParams {
        CriteriaParams {
            p_max: self.config.p_max,
            horizon: self.config.planning_horizon,
            soft_skill_names: self.config.soft_skill_names.clone(),
        }
    }

    pub fn scheduler_config(&self) -> SchedulerConfig {
        SchedulerConfig {
            beam_width: self.config.beam_width,
            planning_horizon: self.config.planning_horizon,
            team_enumeration_cap: self.config.team_enumeration_cap,
        }
    }

    fn ingest_all(&mut self, observations: Vec<ObservationRecord>) {
        let now = self.clock;
        for obs in observations {
            self.profiles
                .ingest(obs, now)
                .expect("simulator emits valid observations");
        }
    }

    fn handle_completions(&mut self, k: Timestep) {
        let done: Vec<(TaskId, Tso)> = self
            .schedule
            .iter()
            .filter(|(_, tso)| tso.interval.beta <= k)
            .map(|(id, tso)| (id.clone(), tso.clone()))
            .collect();
        for (id, tso) in done {
            let task = self.tasks[&id].clone();
            let reviews = emit_performance_review(
                &task,
                &tso.team,
                &self.truth,
                &self.workers,
                k,
                &mut self.bias,
                &mut self.rng.noise,
                self.config.sigma_v,
                self.config.sigma_r,
            );
            let peer = emit_peer_feedback(
                &task,
                &tso.team,
                &self.truth,
                &self.workers,
                &self.config,
                k,
                &mut self.bias,
                &mut self.rng.noise,
                &mut self.rng.task_content,
            );
            self.ingest_all(reviews);
            self.ingest_all(peer);
            let outcome = self.outcomes.get(&id).copied().unwrap_or(0.5);
            for member in &tso.team {
                if let Some(w) = self.workers.get_mut(member) {
                    w.history.push(HistoryEntry {
                        task: id.clone(),
                        outcome,
                    });
                }
            }
            self.schedule.remove(&id);
            self.completed.insert(id, tso);
        }
    }

    fn run_staffing_round(&mut self, k: Timestep) -> Result<(usize, Vec<f64>), SchedulerError> {
        let batch: Vec<TaskId> = self.pending.iter().cloned().collect();
        let params = self.criteria_params();
        let sched_cfg = self.scheduler_config();
        let workers_cal = workers_with_calendars(&self.workers, &self.schedule, &self.tasks);

        let mut questions = 0usize;
        let planned = {
            let mut oracle = SelfEvalOracle {
                truth: &self.truth,
                bias: &mut self.bias,
                noise: &mut self.rng.noise,
                asked: &mut self.asked,
                questions: &mut questions,
                sigma_v: self.config.sigma_v,
                sigma_r: self.config.sigma_r,
            };
            let ctx = PlanContext {
                tasks: &self.tasks,
                workers: &workers_cal,
                weights: &self.config.weights,
                params: &params,
                config: &sched_cfg,
                now: k,
            };
            schedule(
                &batch,
                &self.schedule,
                &mut self.profiles,
                Some(&mut oracle),
                &ctx,
            )?
        };

        let top = planned.into_iter().next().expect("beam width >= 1");
        let newly: Vec<(TaskId, Tso)> = top
            .schedule
            .iter()
            .filter(|(id, _)| self.schedule.get(id).is_none())
            .map(|(id, tso)| (id.clone(), tso.clone()))
            .collect();

        let mut optimalities = Vec::new();
        for (id, tso) in &newly {
            let task = self.tasks[id].clone();
            // Supervisor proposes; members respond with preference-laden
            // motivations either way, but the schedule stays confirmed.
            for member in &tso.team {
                let accepted = decide_acceptance(
                    member,
                    &task,
                    &self.truth,
                    self.config.reject_scale,
                    &mut self.rng.acceptance,
                );
                let feedback = emit_task_proposal_feedback(
                    member,
                    &task,
                    accepted,
                    &self.truth,
                    self.config.proposal_subsample,
                    k,
                    &mut self.rng.noise,
                    &mut self.rng.acceptance,
                    self.config.sigma_r,
                );
                self.ingest_all(feedback);
            }
            let mut context = top.schedule.clone();
            context.remove(id);
            let (outcome, optimality) = task_outcome_oracle(
                &task,
                tso,
                &context,
                &self.truth,
                &self.workers,
                &self.tasks,
                k,
                &sched_cfg,
                &params,
            );
            self.outcomes.insert(id.clone(), outcome);
            self.samples.push(OptimalitySample {
                task: id.clone(),
                step: k,
                outcome,
                optimality,
            });
            optimalities.push(optimality);
            self.pending.remove(id);
        }
        self.schedule = top.schedule;

        debug_assert!(
            check_feasibility(&self.schedule, &self.tasks, &self.workers)
                .iter()
                .all(|v| v.kind == ViolationKind::Deadline),
            "confirmed schedule must stay feasible"
        );
        Ok((questions, optimalities))
    }

    /// Advance one timestep: completions, arrivals, (possibly) one
    /// staffing round, then a metric row.
    pub fn step(&mut self) -> Result<(), SchedulerError> {
        let k = self.clock + 1;
        self.clock = k;

        self.handle_completions(k);

        let arrivals = poisson(&mut self.rng.arrivals, self.config.arrival_rate);
        for _ in 0..arrivals {
            let task = generate_task(self);
            self.pending.insert(task.id.clone());
            self.tasks.insert(task.id.clone(), task);
        }

        self.profiles.refresh(k);

        let (questions, optimalities) = if self.pending.len() >= self.config.batch_trigger {
            self.run_staffing_round(k)?
        } else {
            (0, vec![])
        };

        let report = self.profiles.accuracy_report(&self.truth);
        self.metrics.push(MetricRow {
            step: k,
            mae_hard: report.hard_skills.mae,
            mae_soft: report.soft_skills.mae,
            mae_task_pref: report.task_preferences.mae,
            mae_teammate_pref: report.teammate_preferences.mae,
            unknown: report.total_unknown(),
            correct: report.total_correct(),
            incorrect: report.total_incorrect(),
            questions,
            mean_optimality: if optimalities.is_empty() {
                None
            } else {
                Some(optimalities.iter().sum::<f64>() / optimalities.len() as f64)
            },
            tasks_scheduled: optimalities.len(),
        });
        Ok(())
    }

    pub fn run(&mut self, steps: Timestep) -> Result<(), SchedulerError> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}
