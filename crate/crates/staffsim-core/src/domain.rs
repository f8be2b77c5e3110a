//! Core data model: tasks, workers, attribute scales, schedules and the
//! conversions between discrete levels and unit-interval values.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Discrete simulation time. One timestep is one workday.
pub type Timestep = u32;

/// Number of distinct skill levels (0 ..= 6).
pub const SKILL_LEVELS: u8 = 7;
/// Number of distinct preference levels (-2 ..= 2).
pub const PREFERENCE_LEVELS: u8 = 5;
/// Median skill level, used as the default estimate for unknown skills.
pub const SKILL_MEDIAN: u8 = 3;
/// Neutral preference level, used as the default for unknown preferences.
pub const PREFERENCE_NEUTRAL: i8 = 0;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkerId(pub String);

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub String);

impl WorkerId {
    pub fn new(s: impl Into<String>) -> Self {
        WorkerId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TaskId {
    pub fn new(s: impl Into<String>) -> Self {
        TaskId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for WorkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WorkerId({})", self.0)
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TaskId({})", self.0)
    }
}

/// Proficiency on the 7-point qualitative scale, 0 = "No competence" up to
/// 6 = "Expert".
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SkillLevel(u8);

impl SkillLevel {
    pub const MIN: u8 = 0;
    pub const MAX: u8 = 6;

    pub fn new(value: u8) -> Result<Self, LevelError> {
        if value <= Self::MAX {
            Ok(SkillLevel(value))
        } else {
            Err(LevelError::SkillOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Display name used in reports and generated feedback.
    pub fn name(self) -> &'static str {
        match self.0 {
            0 => "No competence",
            1 => "Novice",
            2 => "Beginner",
            3 => "Intermediate",
            4 => "Proficient",
            5 => "Advanced",
            _ => "Expert",
        }
    }
}

/// Preference on the 5-point scale, -2 = "Strong aversion" up to
/// +2 = "Strong preference".
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreferenceLevel(i8);

impl PreferenceLevel {
    pub const MIN: i8 = -2;
    pub const MAX: i8 = 2;

    pub fn new(value: i8) -> Result<Self, LevelError> {
        if (Self::MIN..=Self::MAX).contains(&value) {
            Ok(PreferenceLevel(value))
        } else {
            Err(LevelError::PreferenceOutOfRange(value))
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            -2 => "Strong aversion",
            -1 => "Slight aversion",
            0 => "Neutral",
            1 => "Slight preference",
            _ => "Strong preference",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LevelError {
    SkillOutOfRange(u8),
    PreferenceOutOfRange(i8),
}

impl fmt::Display for LevelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelError::SkillOutOfRange(v) => write!(f, "skill level {v} outside 0..=6"),
            LevelError::PreferenceOutOfRange(v) => {
                write!(f, "preference level {v} outside -2..=2")
            }
        }
    }
}

/// Which discrete scale a continuous estimate belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Skill,
    Preference,
}

/// Map a skill level onto [0, 1].
pub fn skill_to_unit(level: SkillLevel) -> f64 {
    f64::from(level.value()) / f64::from(SkillLevel::MAX)
}

/// Map a preference level onto [0, 1]; neutral maps to 0.5.
pub fn preference_to_unit(level: PreferenceLevel) -> f64 {
    (f64::from(level.value()) + 2.0) / 4.0
}

/// Continuous level value mapped onto [0, 1] without rounding.
pub fn raw_level_to_unit(x: f64, scale: Scale) -> f64 {
    match scale {
        Scale::Skill => clamp_f64(x / f64::from(SkillLevel::MAX), 0.0, 1.0),
        Scale::Preference => clamp_f64((x + 2.0) / 4.0, 0.0, 1.0),
    }
}

/// Discretize a continuous estimate: clamp to the scale bounds, then round
/// half away from zero.
pub fn round_to_level(x: f64, scale: Scale) -> i8 {
    let (lo, hi) = match scale {
        Scale::Skill => (f64::from(SkillLevel::MIN), f64::from(SkillLevel::MAX)),
        Scale::Preference => (
            f64::from(PreferenceLevel::MIN),
            f64::from(PreferenceLevel::MAX),
        ),
    };
    // libm::round rounds half away from zero.
    libm::round(clamp_f64(x, lo, hi)) as i8
}

pub(crate) fn clamp_f64(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

/// Full-time tasks monopolize their workers; part-time tasks are only
/// workload-constrained and may overlap anything.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    FullTime,
    PartTime,
}

/// Half-open interval [alpha, beta) of timesteps.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Interval {
    pub alpha: Timestep,
    pub beta: Timestep,
}

impl Interval {
    pub fn new(alpha: Timestep, beta: Timestep) -> Self {
        debug_assert!(alpha < beta, "interval must be nonempty");
        Interval { alpha, beta }
    }

    pub fn len(&self) -> Timestep {
        self.beta - self.alpha
    }

    pub fn is_empty(&self) -> bool {
        self.alpha >= self.beta
    }

    pub fn contains(&self, t: Timestep) -> bool {
        self.alpha <= t && t < self.beta
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.alpha < other.beta && other.alpha < self.beta
    }
}

/// Structured task description.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub arrival_time: Timestep,
    /// Relative importance, 1 ..= P_max.
    pub priority: u32,
    /// role name -> number of workers of that role required.
    pub required_roles: BTreeMap<String, u32>,
    /// role name -> hard skills the task exercises for that role.
    pub required_skills: BTreeMap<String, BTreeSet<String>>,
    pub topics: BTreeSet<String>,
    /// Timesteps needed to complete the task, >= 1.
    pub duration: Timestep,
    /// Total effort units; per-day rate is workload / duration.
    pub workload: f64,
    #[serde(default)]
    pub must_include: BTreeSet<WorkerId>,
    #[serde(default)]
    pub must_exclude: BTreeSet<WorkerId>,
    #[serde(default)]
    pub deadline: Option<Timestep>,
    pub timing: Timing,
}

impl TaskSpec {
    pub fn workload_rate(&self) -> f64 {
        self.workload / f64::from(self.duration)
    }

    pub fn team_size(&self) -> u32 {
        self.required_roles.values().sum()
    }

    pub fn validate(&self) -> Result<(), String> {
        use alloc::format;
        if self.duration < 1 {
            return Err(format!("task {}: duration must be >= 1", self.id));
        }
        if self.team_size() < 1 {
            return Err(format!("task {}: at least one worker required", self.id));
        }
        if self.workload <= 0.0 {
            return Err(format!("task {}: workload must be positive", self.id));
        }
        if self.priority < 1 {
            return Err(format!("task {}: priority must be >= 1", self.id));
        }
        if self.must_include.intersection(&self.must_exclude).next().is_some() {
            return Err(format!(
                "task {}: must_include and must_exclude overlap",
                self.id
            ));
        }
        Ok(())
    }
}

/// Seniority drives salary, capacity and sampled true skill levels.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seniority {
    Junior,
    Senior,
}

/// One completed task and the oracle score of its outcome.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub task: TaskId,
    pub outcome: f64,
}

/// Observable worker fields. True attributes live in [`TrueAttributes`]
/// and are visible only to the simulator.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct WorkerState {
    pub id: WorkerId,
    pub role: String,
    pub seniority: Seniority,
    /// Currency per timestep, > 0.
    pub salary: f64,
    /// Effort units per day, > 0.
    pub work_capacity: f64,
    #[serde(default)]
    pub calendar: crate::calendar::CalendarView,
    #[serde(default)]
    pub history: Vec<HistoryEntry>,
}

/// Latent worker attributes, ground truth for the simulator only.
#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct TrueAttributes {
    pub hard_skills: BTreeMap<String, SkillLevel>,
    pub soft_skills: BTreeMap<String, SkillLevel>,
    pub task_preferences: BTreeMap<String, PreferenceLevel>,
    pub teammate_preferences: BTreeMap<WorkerId, PreferenceLevel>,
}

/// Task scheduling option: one way of executing a task.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Tso {
    pub team: BTreeSet<WorkerId>,
    pub interval: Interval,
}

/// Map task -> TSO. Encodes both the assignment variables and the
/// per-task intervals.
#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub assignments: BTreeMap<TaskId, Tso>,
}

impl Schedule {
    pub fn new() -> Self {
        Schedule::default()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, task: &TaskId) -> Option<&Tso> {
        self.assignments.get(task)
    }

    pub fn insert(&mut self, task: TaskId, tso: Tso) {
        self.assignments.insert(task, tso);
    }

    pub fn remove(&mut self, task: &TaskId) -> Option<Tso> {
        self.assignments.remove(task)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TaskId, &Tso)> {
        self.assignments.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skill_to_unit_bounds() {
        assert_eq!(skill_to_unit(SkillLevel::new(0).unwrap()), 0.0);
        assert_eq!(skill_to_unit(SkillLevel::new(6).unwrap()), 1.0);
        assert_eq!(skill_to_unit(SkillLevel::new(3).unwrap()), 0.5);
    }

    #[test]
    fn preference_to_unit_bounds() {
        assert_eq!(preference_to_unit(PreferenceLevel::new(-2).unwrap()), 0.0);
        assert_eq!(preference_to_unit(PreferenceLevel::new(0).unwrap()), 0.5);
        assert_eq!(preference_to_unit(PreferenceLevel::new(2).unwrap()), 1.0);
    }

    #[test]
    fn round_half_away_from_zero() {
        assert_eq!(round_to_level(4.5, Scale::Skill), 5);
        assert_eq!(round_to_level(-0.5, Scale::Preference), -1);
        assert_eq!(round_to_level(9.0, Scale::Skill), 6);
        assert_eq!(round_to_level(-7.0, Scale::Preference), -2);
    }

    #[test]
    fn level_round_trip() {
        for v in 0..=6u8 {
            let l = SkillLevel::new(v).unwrap();
            let unit = skill_to_unit(l);
            assert_eq!(round_to_level(unit * 6.0, Scale::Skill), v as i8);
        }
        for v in -2..=2i8 {
            let l = PreferenceLevel::new(v).unwrap();
            let unit = preference_to_unit(l);
            assert_eq!(round_to_level(unit * 4.0 - 2.0, Scale::Preference), v);
        }
    }

    #[test]
    fn out_of_range_levels_rejected() {
        assert!(SkillLevel::new(7).is_err());
        assert!(PreferenceLevel::new(3).is_err());
        assert!(PreferenceLevel::new(-3).is_err());
    }

    #[test]
    fn interval_serializes_as_alpha_beta() {
        let i = Interval::new(2, 5);
        let json = serde_json::to_string(&i).unwrap();
        assert_eq!(json, r#"{"alpha":2,"beta":5}"#);
    }

    #[test]
    fn interval_overlap() {
        let a = Interval::new(2, 5);
        assert!(a.overlaps(&Interval::new(4, 6)));
        assert!(!a.overlaps(&Interval::new(5, 7)));
        assert!(!a.overlaps(&Interval::new(0, 2)));
    }
}
