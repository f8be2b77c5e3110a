//! The nine optimization objectives evaluated on a candidate schedule and
//! their weighted aggregation. All criteria are normalized to [0, 1],
//! "higher is better"; minimization objectives (waiting, cost, balance)
//! are inverted internally. Missing hard-skill information surfaces as
//! queries on the score rather than as an error.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{clamp_f64, raw_level_to_unit, Scale, Schedule, TaskId, TaskSpec, Timestep, WorkerId, WorkerState};
use crate::profiling::{AttributeKey, ProfileStore};

/// Read access to (estimated or true) worker attributes on the continuous
/// level scale. `None` means the attribute is unknown to the source.
pub trait AttributeSource {
    fn hard_skill(&self, worker: &WorkerId, skill: &str) -> Option<f64>;
    fn soft_skill(&self, worker: &WorkerId, skill: &str) -> Option<f64>;
    fn task_pref(&self, worker: &WorkerId, topic: &str) -> Option<f64>;
    fn teammate_pref(&self, observer: &WorkerId, other: &WorkerId) -> Option<f64>;
}

impl AttributeSource for ProfileStore {
    fn hard_skill(&self, worker: &WorkerId, skill: &str) -> Option<f64> {
        self.mean_level(worker, &AttributeKey::hard_skill(skill))
    }

    fn soft_skill(&self, worker: &WorkerId, skill: &str) -> Option<f64> {
        self.mean_level(worker, &AttributeKey::soft_skill(skill))
    }

    fn task_pref(&self, worker: &WorkerId, topic: &str) -> Option<f64> {
        self.mean_level(worker, &AttributeKey::task_pref(topic))
    }

    fn teammate_pref(&self, observer: &WorkerId, other: &WorkerId) -> Option<f64> {
        self.mean_level(observer, &AttributeKey::teammate_pref(other))
    }
}

/// A missing-information query raised while evaluating the hard-skill
/// match criterion.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Query {
    pub worker: WorkerId,
    pub skill: String,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CriterionScore {
    pub id: u8,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries_raised: Vec<Query>,
}

impl CriterionScore {
    fn plain(id: u8, value: f64) -> Self {
        CriterionScore {
            id,
            value,
            queries_raised: Vec::new(),
        }
    }
}

/// Importance coefficients; negative weights flip a criterion into a
/// minimization objective.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector {
    pub c: BTreeMap<u8, f64>,
}

impl Default for WeightVector {
    fn default() -> Self {
        WeightVector {
            c: (1..=9).map(|id| (id, 1.0)).collect(),
        }
    }
}

impl WeightVector {
    pub fn is_degenerate(&self) -> bool {
        !self.c.values().any(|&w| w != 0.0)
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum CriteriaError {
    DegenerateWeights,
    MissingScore(u8),
}

impl fmt::Display for CriteriaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriteriaError::DegenerateWeights => f.write_str("degenerate weight vector"),
            CriteriaError::MissingScore(id) => write!(f, "no score for weighted criterion {id}"),
        }
    }
}

/// Static evaluation context shared by all criteria.
#[derive(Clone, Debug)]
pub struct CriteriaParams {
    /// Upper bound of the priority range.
    pub p_max: u32,
    /// Horizon length used to normalize waiting times.
    pub horizon: Timestep,
    /// Dimension order of the soft-skill vectors.
    pub soft_skill_names: Vec<String>,
}

/// Criterion 1: average priority of scheduled tasks, normalized by P_max.
pub fn eval_avg_priority(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    params: &CriteriaParams,
) -> CriterionScore {
    let mut sum = 0.0;
    let mut n = 0usize;
    for task_id in s.assignments.keys() {
        if let Some(t) = tasks.get(task_id) {
            sum += f64::from(t.priority);
            n += 1;
        }
    }
    let value = if n == 0 {
        0.0
    } else {
        sum / n as f64 / f64::from(params.p_max)
    };
    CriterionScore::plain(1, value)
}

/// Criterion 2: priority-weighted waiting time, inverted and clamped.
pub fn eval_waiting(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    params: &CriteriaParams,
) -> CriterionScore {
    let mut weighted_wait = 0.0;
    let mut prio_sum = 0.0;
    for (task_id, tso) in s.iter() {
        if let Some(t) = tasks.get(task_id) {
            let wait = tso.interval.alpha.saturating_sub(t.arrival_time);
            weighted_wait += f64::from(t.priority) * f64::from(wait);
            prio_sum += f64::from(t.priority);
        }
    }
    let value = if prio_sum == 0.0 {
        1.0
    } else {
        1.0 - clamp_f64(
            weighted_wait / (prio_sum * f64::from(params.horizon)),
            0.0,
            1.0,
        )
    };
    CriterionScore::plain(2, value)
}

/// Criterion 3: fraction of tasks that made it into the schedule.
pub fn eval_task_count(s: &Schedule, tasks: &BTreeMap<TaskId, TaskSpec>) -> CriterionScore {
    let value = if tasks.is_empty() {
        1.0
    } else {
        s.len() as f64 / tasks.len() as f64
    };
    CriterionScore::plain(3, value)
}

/// Criterion 4: economic cost (wages times working time), inverted
/// against the worst-case reference cost.
pub fn eval_cost(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
) -> CriterionScore {
    let max_salary = workers
        .values()
        .map(|w| w.salary)
        .fold(0.0f64, f64::max);
    let c_ref: f64 = tasks
        .values()
        .map(|t| f64::from(t.duration) * f64::from(t.team_size()) * max_salary)
        .sum();
    let mut cost = 0.0;
    for (task_id, tso) in s.iter() {
        if let Some(t) = tasks.get(task_id) {
            for member in &tso.team {
                if let Some(w) = workers.get(member) {
                    cost += w.salary * f64::from(t.duration);
                }
            }
        }
    }
    let value = if c_ref <= 0.0 {
        1.0
    } else {
        1.0 - clamp_f64(cost / c_ref, 0.0, 1.0)
    };
    CriterionScore::plain(4, value)
}

/// Criterion 5: balance of active times across workers (inverted
/// coefficient of variation).
pub fn eval_balance(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
) -> CriterionScore {
    let mut active: BTreeMap<&WorkerId, f64> = workers.keys().map(|w| (w, 0.0)).collect();
    for (task_id, tso) in s.iter() {
        if let Some(t) = tasks.get(task_id) {
            for member in &tso.team {
                if let Some(a) = active.get_mut(member) {
                    *a += f64::from(t.duration);
                }
            }
        }
    }
    let n = active.len();
    if n == 0 {
        return CriterionScore::plain(5, 1.0);
    }
    let mean = active.values().sum::<f64>() / n as f64;
    if mean == 0.0 {
        return CriterionScore::plain(5, 1.0);
    }
    let var = active.values().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
    let std = libm::sqrt(var);
    let value = 1.0 - clamp_f64(std / (mean + 1e-9), 0.0, 1.0);
    CriterionScore::plain(5, value)
}

fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 && nb == 0.0 {
        1.0
    } else if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn soft_skill_vector(
    source: &dyn AttributeSource,
    worker: &WorkerId,
    names: &[String],
) -> Vec<f64> {
    names
        .iter()
        .map(|name| source.soft_skill(worker, name).unwrap_or(3.0))
        .collect()
}

/// Criterion 6: soft-skill diversity via rescaled cosine distance,
/// averaged over member pairs and then over tasks.
pub fn eval_soft_skill_diversity(
    s: &Schedule,
    source: &dyn AttributeSource,
    params: &CriteriaParams,
) -> CriterionScore {
    if s.is_empty() {
        return CriterionScore::plain(6, 0.5);
    }
    let mut task_values = Vec::with_capacity(s.len());
    for tso in s.assignments.values() {
        let members: Vec<&WorkerId> = tso.team.iter().collect();
        if members.len() < 2 {
            task_values.push(0.5);
            continue;
        }
        let vectors: Vec<Vec<f64>> = members
            .iter()
            .map(|m| soft_skill_vector(source, m, &params.soft_skill_names))
            .collect();
        let mut pair_sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                let psi = cosine_similarity(&vectors[i], &vectors[j]);
                pair_sum += (1.0 - psi) / 2.0;
                pairs += 1;
            }
        }
        task_values.push(pair_sum / pairs as f64);
    }
    let value = task_values.iter().sum::<f64>() / task_values.len() as f64;
    CriterionScore::plain(6, value)
}

/// Criterion 7: teammate compatibility from estimated teammate
/// preferences over ordered member pairs.
pub fn eval_teammate_compat(s: &Schedule, source: &dyn AttributeSource) -> CriterionScore {
    if s.is_empty() {
        return CriterionScore::plain(7, 0.5);
    }
    let mut task_values = Vec::with_capacity(s.len());
    for tso in s.assignments.values() {
        let members: Vec<&WorkerId> = tso.team.iter().collect();
        if members.len() < 2 {
            task_values.push(0.5);
            continue;
        }
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for o in &members {
            for w in &members {
                if o == w {
                    continue;
                }
                let unit = source
                    .teammate_pref(o, w)
                    .map(|lvl| raw_level_to_unit(lvl, Scale::Preference))
                    .unwrap_or(0.5);
                sum += unit;
                pairs += 1;
            }
        }
        task_values.push(sum / pairs as f64);
    }
    let value = task_values.iter().sum::<f64>() / task_values.len() as f64;
    CriterionScore::plain(7, value)
}

/// Criterion 8: match between required hard skills and the assigned
/// workers' estimated levels. Required skills with no observations fall
/// back to the median level and raise a (worker, skill) query.
pub fn eval_hard_skill_match(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    source: &dyn AttributeSource,
) -> CriterionScore {
    let mut queries = Vec::new();
    let mut pair_values = Vec::new();
    for (task_id, tso) in s.iter() {
        let Some(task) = tasks.get(task_id) else {
            continue;
        };
        for member in &tso.team {
            let Some(worker) = workers.get(member) else {
                continue;
            };
            let Some(required) = task.required_skills.get(&worker.role) else {
                continue;
            };
            if required.is_empty() {
                continue;
            }
            let mut sum = 0.0;
            for skill in required {
                match source.hard_skill(member, skill) {
                    Some(level) => sum += raw_level_to_unit(level, Scale::Skill),
                    None => {
                        queries.push(Query {
                            worker: member.clone(),
                            skill: skill.clone(),
                        });
                        sum += 0.5;
                    }
                }
            }
            pair_values.push(sum / required.len() as f64);
        }
    }
    let value = if pair_values.is_empty() {
        0.5
    } else {
        pair_values.iter().sum::<f64>() / pair_values.len() as f64
    };
    queries.sort();
    queries.dedup();
    CriterionScore {
        id: 8,
        value,
        queries_raised: queries,
    }
}

/// Criterion 9: fit between task topics and estimated task preferences;
/// unknown preferences are assumed neutral, no queries raised.
pub fn eval_task_pref_fit(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    source: &dyn AttributeSource,
) -> CriterionScore {
    let mut pair_values = Vec::new();
    for (task_id, tso) in s.iter() {
        let Some(task) = tasks.get(task_id) else {
            continue;
        };
        if task.topics.is_empty() {
            continue;
        }
        for member in &tso.team {
            let mut sum = 0.0;
            for topic in &task.topics {
                let unit = source
                    .task_pref(member, topic)
                    .map(|lvl| raw_level_to_unit(lvl, Scale::Preference))
                    .unwrap_or(0.5);
                sum += unit;
            }
            pair_values.push(sum / task.topics.len() as f64);
        }
    }
    let value = if pair_values.is_empty() {
        0.5
    } else {
        pair_values.iter().sum::<f64>() / pair_values.len() as f64
    };
    CriterionScore::plain(9, value)
}

/// Weighted aggregation V = sum(c_i * u_i) / sum(|c_i|).
pub fn aggregate_v(
    scores: &BTreeMap<u8, f64>,
    weights: &WeightVector,
) -> Result<f64, CriteriaError> {
    if weights.is_degenerate() {
        return Err(CriteriaError::DegenerateWeights);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&id, &c) in &weights.c {
        if c == 0.0 {
            continue;
        }
        let u = scores.get(&id).ok_or(CriteriaError::MissingScore(id))?;
        num += c * u;
        den += c.abs();
    }
    Ok(num / den)
}

/// Evaluate all nine criteria on a candidate schedule.
pub fn evaluate_all(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    source: &dyn AttributeSource,
    params: &CriteriaParams,
) -> Vec<CriterionScore> {
    alloc::vec![
        eval_avg_priority(s, tasks, params),
        eval_waiting(s, tasks, params),
        eval_task_count(s, tasks),
        eval_cost(s, tasks, workers),
        eval_balance(s, tasks, workers),
        eval_soft_skill_diversity(s, source, params),
        eval_teammate_compat(s, source),
        eval_hard_skill_match(s, tasks, workers, source),
        eval_task_pref_fit(s, tasks, source),
    ]
}

/// Full scoring path used by the scheduler and by test oracles: evaluate
/// all criteria, then aggregate. Returns the aggregate value, the
/// per-criterion scores and any criterion-8 queries.
pub fn score_schedule(
    s: &Schedule,
    tasks: &BTreeMap<TaskId, TaskSpec>,
    workers: &BTreeMap<WorkerId, WorkerState>,
    source: &dyn AttributeSource,
    params: &CriteriaParams,
    weights: &WeightVector,
) -> Result<(f64, Vec<CriterionScore>), CriteriaError> {
    let scores = evaluate_all(s, tasks, workers, source, params);
    let map: BTreeMap<u8, f64> = scores.iter().map(|c| (c.id, c.value)).collect();
    let v = aggregate_v(&map, weights)?;
    Ok((v, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;
    use crate::domain::{Interval, Seniority, Timing, Tso};

    struct Fixed(BTreeMap<(String, String), f64>);

    impl Fixed {
        fn empty() -> Self {
            Fixed(BTreeMap::new())
        }
        fn with(entries: &[(&str, &str, f64)]) -> Self {
            Fixed(
                entries
                    .iter()
                    .map(|(w, a, v)| ((w.to_string(), a.to_string()), *v))
                    .collect(),
            )
        }
        fn get(&self, w: &WorkerId, a: &str) -> Option<f64> {
            self.0.get(&(w.0.clone(), a.to_string())).copied()
        }
    }

    impl AttributeSource for Fixed {
        fn hard_skill(&self, w: &WorkerId, s: &str) -> Option<f64> {
            self.get(w, s)
        }
        fn soft_skill(&self, w: &WorkerId, s: &str) -> Option<f64> {
            self.get(w, s)
        }
        fn task_pref(&self, w: &WorkerId, t: &str) -> Option<f64> {
            self.get(w, t)
        }
        fn teammate_pref(&self, o: &WorkerId, w: &WorkerId) -> Option<f64> {
            self.get(o, w.as_str())
        }
    }

    fn worker(id: &str, role: &str, salary: f64) -> (WorkerId, WorkerState) {
        (
            WorkerId::new(id),
            WorkerState {
                id: WorkerId::new(id),
                role: role.into(),
                seniority: Seniority::Senior,
                salary,
                work_capacity: 2.0,
                calendar: Default::default(),
                history: vec![],
            },
        )
    }

    fn task(id: &str, priority: u32, arrival: Timestep, duration: Timestep) -> TaskSpec {
        TaskSpec {
            id: TaskId::new(id),
            arrival_time: arrival,
            priority,
            required_roles: BTreeMap::from([("dev".to_string(), 1)]),
            required_skills: BTreeMap::new(),
            topics: BTreeSet::new(),
            duration,
            workload: 1.0,
            must_include: BTreeSet::new(),
            must_exclude: BTreeSet::new(),
            deadline: None,
            timing: Timing::FullTime,
        }
    }

    fn params() -> CriteriaParams {
        CriteriaParams {
            p_max: 5,
            horizon: 10,
            soft_skill_names: vec!["a".into(), "b".into()],
        }
    }

    fn assign(s: &mut Schedule, id: &str, members: &[&str], alpha: Timestep, beta: Timestep) {
        s.insert(
            TaskId::new(id),
            Tso {
                team: members.iter().map(|m| WorkerId::new(*m)).collect(),
                interval: Interval::new(alpha, beta),
            },
        );
    }

    #[test]
    fn avg_priority_examples() {
        let tasks = BTreeMap::from([
            (TaskId::new("t1"), task("t1", 2, 0, 1)),
            (TaskId::new("t2"), task("t2", 4, 0, 1)),
        ]);
        let empty = Schedule::new();
        assert_eq!(eval_avg_priority(&empty, &tasks, &params()).value, 0.0);
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1"], 0, 1);
        assign(&mut s, "t2", &["w1"], 1, 2);
        // priorities {2, 4}, P_max = 5 -> 0.6
        assert!((eval_avg_priority(&s, &tasks, &params()).value - 0.6).abs() < 1e-12);
    }

    #[test]
    fn waiting_examples() {
        let tasks = BTreeMap::from([
            (TaskId::new("t1"), task("t1", 1, 0, 1)),
            (TaskId::new("t2"), task("t2", 3, 2, 1)),
        ]);
        let mut zero_wait = Schedule::new();
        assign(&mut zero_wait, "t1", &["w1"], 0, 1);
        assign(&mut zero_wait, "t2", &["w1"], 2, 3);
        assert_eq!(eval_waiting(&zero_wait, &tasks, &params()).value, 1.0);

        // waits 4 (prio 1) and 0 (prio 3), H = 10 -> 1 - 4/40 = 0.9
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1"], 4, 5);
        assign(&mut s, "t2", &["w1"], 2, 3);
        assert!((eval_waiting(&s, &tasks, &params()).value - 0.9).abs() < 1e-12);

        let one = BTreeMap::from([(TaskId::new("t1"), task("t1", 1, 0, 1))]);
        let mut saturated = Schedule::new();
        assign(&mut saturated, "t1", &["w1"], 10, 11);
        assert_eq!(eval_waiting(&saturated, &one, &params()).value, 0.0);
    }

    #[test]
    fn task_count_ratio() {
        let tasks: BTreeMap<_, _> = (0..4)
            .map(|i| {
                let id = alloc::format!("t{i}");
                (TaskId::new(id.clone()), task(&id, 1, 0, 1))
            })
            .collect();
        let mut s = Schedule::new();
        for i in 0..3 {
            assign(&mut s, &alloc::format!("t{i}"), &["w1"], 0, 1);
        }
        assert_eq!(eval_task_count(&s, &tasks).value, 0.75);
        assert_eq!(eval_task_count(&Schedule::new(), &tasks).value, 0.0);
    }

    #[test]
    fn cost_examples() {
        let workers = BTreeMap::from([worker("w1", "dev", 10.0)]);
        // One task, duration 4, 2 slots: C_ref = 4 * 2 * 10 = 80.
        let mut t = task("t1", 1, 0, 4);
        t.required_roles.insert("dev".into(), 2);
        let tasks = BTreeMap::from([(TaskId::new("t1"), t)]);
        assert_eq!(eval_cost(&Schedule::new(), &tasks, &workers).value, 1.0);
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1"], 0, 4);
        // cost = 40, C_ref = 80 -> 0.5
        assert!((eval_cost(&s, &tasks, &workers).value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn balance_examples() {
        let workers = BTreeMap::from([worker("w1", "dev", 1.0), worker("w2", "dev", 1.0)]);
        let tasks = BTreeMap::from([
            (TaskId::new("t1"), task("t1", 1, 0, 2)),
            (TaskId::new("t2"), task("t2", 1, 0, 6)),
        ]);
        assert_eq!(eval_balance(&Schedule::new(), &tasks, &workers).value, 1.0);
        // active = {2, 6}: std = 2, mean = 4 -> 0.5
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1"], 0, 2);
        assign(&mut s, "t2", &["w2"], 0, 6);
        let got = eval_balance(&s, &tasks, &workers).value;
        assert!((got - 0.5).abs() < 1e-9);
    }

    #[test]
    fn soft_skill_diversity_pairs() {
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1", "w2"], 0, 1);
        let p = params();

        // identical nonzero vectors -> psi = 1 -> pair value 0
        let same = Fixed::with(&[
            ("w1", "a", 2.0),
            ("w1", "b", 3.0),
            ("w2", "a", 2.0),
            ("w2", "b", 3.0),
        ]);
        assert!(eval_soft_skill_diversity(&s, &same, &p).value.abs() < 1e-12);

        // orthogonal vectors -> psi = 0 -> 0.5
        let ortho = Fixed::with(&[
            ("w1", "a", 1.0),
            ("w1", "b", 0.0),
            ("w2", "a", 0.0),
            ("w2", "b", 1.0),
        ]);
        assert!((eval_soft_skill_diversity(&s, &ortho, &p).value - 0.5).abs() < 1e-12);

        // (1,0) vs (1,1): (1 - 1/sqrt(2)) / 2
        let angled = Fixed::with(&[
            ("w1", "a", 1.0),
            ("w1", "b", 0.0),
            ("w2", "a", 1.0),
            ("w2", "b", 1.0),
        ]);
        let expected = (1.0 - 1.0 / libm::sqrt(2.0)) / 2.0;
        assert!((eval_soft_skill_diversity(&s, &angled, &p).value - expected).abs() < 1e-12);

        assert_eq!(
            eval_soft_skill_diversity(&Schedule::new(), &same, &p).value,
            0.5
        );
    }

    #[test]
    fn teammate_compat_examples() {
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1", "w2"], 0, 1);

        let all_plus = Fixed::with(&[("w1", "w2", 2.0), ("w2", "w1", 2.0)]);
        assert_eq!(eval_teammate_compat(&s, &all_plus).value, 1.0);

        assert_eq!(eval_teammate_compat(&s, &Fixed::empty()).value, 0.5);

        // levels (+2, -2) -> mean of 1.0 and 0.0 = 0.5
        let split = Fixed::with(&[("w1", "w2", 2.0), ("w2", "w1", -2.0)]);
        assert_eq!(eval_teammate_compat(&s, &split).value, 0.5);
    }

    #[test]
    fn hard_skill_match_examples() {
        let workers = BTreeMap::from([worker("w1", "dev", 1.0)]);
        let mut t = task("t1", 1, 0, 1);
        t.required_skills.insert(
            "dev".into(),
            BTreeSet::from(["rust".to_string(), "sql".to_string()]),
        );
        let tasks = BTreeMap::from([(TaskId::new("t1"), t)]);
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1"], 0, 1);

        let expert = Fixed::with(&[("w1", "rust", 6.0), ("w1", "sql", 6.0)]);
        let score = eval_hard_skill_match(&s, &tasks, &workers, &expert);
        assert_eq!(score.value, 1.0);
        assert!(score.queries_raised.is_empty());

        let unknown = eval_hard_skill_match(&s, &tasks, &workers, &Fixed::empty());
        assert_eq!(unknown.value, 0.5);
        assert_eq!(unknown.queries_raised.len(), 2);

        // levels {2, 4}: mean of 2/6 and 4/6 = 0.5
        let mid = Fixed::with(&[("w1", "rust", 2.0), ("w1", "sql", 4.0)]);
        assert!((eval_hard_skill_match(&s, &tasks, &workers, &mid).value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn task_pref_fit_examples() {
        let mut t = task("t1", 1, 0, 1);
        t.topics = BTreeSet::from(["ai".to_string(), "edu".to_string()]);
        let tasks = BTreeMap::from([(TaskId::new("t1"), t)]);
        let mut s = Schedule::new();
        assign(&mut s, "t1", &["w1"], 0, 1);

        let loves = Fixed::with(&[("w1", "ai", 2.0), ("w1", "edu", 2.0)]);
        assert_eq!(eval_task_pref_fit(&s, &tasks, &loves).value, 1.0);
        assert_eq!(eval_task_pref_fit(&s, &tasks, &Fixed::empty()).value, 0.5);

        // topics {-2, 0} -> mean of 0.0 and 0.5 = 0.25
        let mixed = Fixed::with(&[("w1", "ai", -2.0), ("w1", "edu", 0.0)]);
        assert!((eval_task_pref_fit(&s, &tasks, &mixed).value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn aggregate_examples() {
        let single = WeightVector {
            c: BTreeMap::from([(1, 1.0)]),
        };
        let scores = BTreeMap::from([(1u8, 0.7)]);
        assert!((aggregate_v(&scores, &single).unwrap() - 0.7).abs() < 1e-12);

        let pair = WeightVector {
            c: BTreeMap::from([(1, 1.0), (2, 1.0)]),
        };
        let scores = BTreeMap::from([(1u8, 0.2), (2u8, 0.8)]);
        assert!((aggregate_v(&scores, &pair).unwrap() - 0.5).abs() < 1e-12);

        let mixed = WeightVector {
            c: BTreeMap::from([(1, 2.0), (2, -1.0)]),
        };
        let scores = BTreeMap::from([(1u8, 0.9), (2u8, 0.6)]);
        // (1.8 - 0.6) / 3 = 0.4
        assert!((aggregate_v(&scores, &mixed).unwrap() - 0.4).abs() < 1e-12);

        let degenerate = WeightVector {
            c: BTreeMap::from([(1, 0.0)]),
        };
        assert!(matches!(
            aggregate_v(&scores, &degenerate),
            Err(CriteriaError::DegenerateWeights)
        ));
    }

    #[test]
    fn aggregate_scale_invariant() {
        let scores = BTreeMap::from([(1u8, 0.3), (2u8, 0.9), (3u8, 0.1)]);
        let base = WeightVector {
            c: BTreeMap::from([(1, 1.0), (2, 2.0), (3, -0.5)]),
        };
        let scaled = WeightVector {
            c: base.c.iter().map(|(&k, &v)| (k, v * 3.5)).collect(),
        };
        let a = aggregate_v(&scores, &base).unwrap();
        let b = aggregate_v(&scores, &scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
