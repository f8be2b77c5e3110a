//! Observation store and online attribute estimation.
//!
//! Every attribute of every worker carries a history of annotated
//! observations. Estimates are discounted, observer-weighted averages over
//! that history, recomputed on every ingest so the estimate is always a
//! pure function of the history.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{
    raw_level_to_unit, round_to_level, PreferenceLevel, Scale, SkillLevel, Timestep,
    TrueAttributes, WorkerId, PREFERENCE_NEUTRAL, SKILL_MEDIAN,
};

/// Pseudo-observer id used for performance reviews.
pub const REVIEW_OBSERVER: &str = "review";

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    HardSkill,
    SoftSkill,
    TaskPref,
    TeammatePref,
}

impl AttributeKind {
    pub fn scale(self) -> Scale {
        match self {
            AttributeKind::HardSkill | AttributeKind::SoftSkill => Scale::Skill,
            AttributeKind::TaskPref | AttributeKind::TeammatePref => Scale::Preference,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            AttributeKind::HardSkill => "hard_skill",
            AttributeKind::SoftSkill => "soft_skill",
            AttributeKind::TaskPref => "task_pref",
            AttributeKind::TeammatePref => "teammate_pref",
        }
    }
}

/// (kind, name) pair identifying one latent attribute of a worker.
/// Serialized as `"kind:name"` so it can key JSON maps.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AttributeKey {
    pub kind: AttributeKind,
    pub name: String,
}

impl AttributeKey {
    pub fn new(kind: AttributeKind, name: impl Into<String>) -> Self {
        AttributeKey {
            kind,
            name: name.into(),
        }
    }

    pub fn hard_skill(name: impl Into<String>) -> Self {
        Self::new(AttributeKind::HardSkill, name)
    }

    pub fn soft_skill(name: impl Into<String>) -> Self {
        Self::new(AttributeKind::SoftSkill, name)
    }

    pub fn task_pref(topic: impl Into<String>) -> Self {
        Self::new(AttributeKind::TaskPref, topic)
    }

    pub fn teammate_pref(other: &WorkerId) -> Self {
        Self::new(AttributeKind::TeammatePref, other.as_str())
    }
}

impl From<AttributeKey> for String {
    fn from(key: AttributeKey) -> String {
        let mut s = String::from(key.kind.tag());
        s.push(':');
        s.push_str(&key.name);
        s
    }
}

impl TryFrom<String> for AttributeKey {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        let (tag, name) = s
            .split_once(':')
            .ok_or_else(|| alloc::format!("attribute key '{s}' missing ':'"))?;
        let kind = match tag {
            "hard_skill" => AttributeKind::HardSkill,
            "soft_skill" => AttributeKind::SoftSkill,
            "task_pref" => AttributeKind::TaskPref,
            "teammate_pref" => AttributeKind::TeammatePref,
            other => return Err(alloc::format!("unknown attribute kind '{other}'")),
        };
        Ok(AttributeKey::new(kind, name))
    }
}

/// Which feedback channel produced an observation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSource {
    SelfEval,
    TaskProposal,
    PerformanceReview,
    PeerFeedback,
}

/// One annotated entry of the per-attribute history.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub target: WorkerId,
    pub observer: WorkerId,
    pub attribute: AttributeKey,
    /// Level on the attribute's scale.
    pub level: i8,
    pub timestamp: Timestep,
    pub source: ObservationSource,
    /// Opaque reference to the originating event, kept for traceability.
    pub provenance: String,
}

impl ObservationRecord {
    fn validate(&self) -> Result<(), ProfilingError> {
        match self.attribute.kind.scale() {
            Scale::Skill => {
                if self.level < 0 || self.level as u8 > SkillLevel::MAX {
                    return Err(ProfilingError::LevelOutOfScale {
                        level: self.level,
                        attribute: self.attribute.clone(),
                    });
                }
            }
            Scale::Preference => {
                if !(PreferenceLevel::MIN..=PreferenceLevel::MAX).contains(&self.level) {
                    return Err(ProfilingError::LevelOutOfScale {
                        level: self.level,
                        attribute: self.attribute.clone(),
                    });
                }
            }
        }
        // Preferences are only observed by the worker themselves.
        if self.attribute.kind.scale() == Scale::Preference && self.observer != self.target {
            return Err(ProfilingError::ForeignPreferenceObserver {
                target: self.target.clone(),
                observer: self.observer.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum ProfilingError {
    LevelOutOfScale { level: i8, attribute: AttributeKey },
    ForeignPreferenceObserver { target: WorkerId, observer: WorkerId },
    FutureTimestamp { timestamp: Timestep, now: Timestep },
}

impl fmt::Display for ProfilingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfilingError::LevelOutOfScale { level, attribute } => write!(
                f,
                "level {level} outside the scale of {}:{}",
                attribute.kind.tag(),
                attribute.name
            ),
            ProfilingError::ForeignPreferenceObserver { target, observer } => write!(
                f,
                "preference of {target} observed by {observer}; preferences are self-reported"
            ),
            ProfilingError::FutureTimestamp { timestamp, now } => {
                write!(f, "observation timestamp {timestamp} is after now = {now}")
            }
        }
    }
}

/// Current estimate for one attribute.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AttributeEstimate {
    /// Continuous weighted average; rounded only at reporting and
    /// criteria boundaries.
    pub mean: f64,
    pub rounded: i8,
    pub observation_count: usize,
    pub last_update: Timestep,
}

/// Observer authority weights used in the skill average. Resolution is by
/// feedback channel: reviews are the most authoritative, peers the least.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct ObserverWeights {
    pub performance_review: f64,
    pub self_eval: f64,
    pub peer: f64,
}

impl Default for ObserverWeights {
    fn default() -> Self {
        ObserverWeights {
            performance_review: 1.0,
            self_eval: 0.8,
            peer: 0.5,
        }
    }
}

impl ObserverWeights {
    pub fn resolve(&self, obs: &ObservationRecord) -> f64 {
        match obs.source {
            ObservationSource::PerformanceReview => self.performance_review,
            ObservationSource::SelfEval => self.self_eval,
            ObservationSource::PeerFeedback => self.peer,
            // Preference channels carry no observer weight; neutral 1.0.
            ObservationSource::TaskProposal => 1.0,
        }
    }
}

/// Discounted weighted average over a nonempty history. Preference
/// observations are weighted by recency alone; skill observations also by
/// the observer's authority. Returns `None` on an empty history (unknown
/// attribute).
pub fn estimate_attribute(
    history: &[ObservationRecord],
    kind: AttributeKind,
    now: Timestep,
    gamma: f64,
    weights: &ObserverWeights,
) -> Option<AttributeEstimate> {
    if history.is_empty() {
        return None;
    }
    debug_assert!(gamma > 0.0 && gamma <= 1.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for obs in history {
        let age = now.saturating_sub(obs.timestamp);
        let mut w = libm::pow(gamma, f64::from(age));
        if kind.scale() == Scale::Skill {
            w *= weights.resolve(obs);
        }
        num += w * f64::from(obs.level);
        den += w;
    }
    let mean = num / den;
    Some(AttributeEstimate {
        mean,
        rounded: round_to_level(mean, kind.scale()),
        observation_count: history.len(),
        last_update: now,
    })
}

#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
struct Slot {
    history: Vec<ObservationRecord>,
    estimate: Option<AttributeEstimate>,
}

/// Per-kind accuracy metrics against the simulator's ground truth.
#[derive(Clone, Copy, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct KindAccuracy {
    pub unknown: usize,
    pub correct: usize,
    pub incorrect: usize,
    /// Mean absolute error on the level scale; unknown attributes are
    /// compared against the scale's median/neutral default.
    pub mae: f64,
}

#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub hard_skills: KindAccuracy,
    pub soft_skills: KindAccuracy,
    pub task_preferences: KindAccuracy,
    pub teammate_preferences: KindAccuracy,
}

impl AccuracyReport {
    pub fn total_unknown(&self) -> usize {
        self.hard_skills.unknown
            + self.soft_skills.unknown
            + self.task_preferences.unknown
            + self.teammate_preferences.unknown
    }

    pub fn total_correct(&self) -> usize {
        self.hard_skills.correct
            + self.soft_skills.correct
            + self.task_preferences.correct
            + self.teammate_preferences.correct
    }

    pub fn total_incorrect(&self) -> usize {
        self.hard_skills.incorrect
            + self.soft_skills.incorrect
            + self.task_preferences.incorrect
            + self.teammate_preferences.incorrect
    }
}

/// Historical database of observations plus current estimates.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ProfileStore {
    pub gamma: f64,
    pub observer_weights: ObserverWeights,
    entries: BTreeMap<WorkerId, BTreeMap<AttributeKey, Slot>>,
}

impl Default for ProfileStore {
    fn default() -> Self {
        ProfileStore::new(0.99, ObserverWeights::default())
    }
}

impl ProfileStore {
    pub fn new(gamma: f64, observer_weights: ObserverWeights) -> Self {
        ProfileStore {
            gamma,
            observer_weights,
            entries: BTreeMap::new(),
        }
    }

    /// Append an observation and recompute the attribute's estimate.
    pub fn ingest(
        &mut self,
        obs: ObservationRecord,
        now: Timestep,
    ) -> Result<&AttributeEstimate, ProfilingError> {
        obs.validate()?;
        if obs.timestamp > now {
            return Err(ProfilingError::FutureTimestamp {
                timestamp: obs.timestamp,
                now,
            });
        }
        let slot = self
            .entries
            .entry(obs.target.clone())
            .or_default()
            .entry(obs.attribute.clone())
            .or_default();
        let kind = obs.attribute.kind;
        slot.history.push(obs);
        slot.estimate = estimate_attribute(
            &slot.history,
            kind,
            now,
            self.gamma,
            &self.observer_weights,
        );
        Ok(slot.estimate.as_ref().expect("nonempty history"))
    }

    /// Refresh estimates at a new timestep so that discounting reflects
    /// the current clock.
    pub fn refresh(&mut self, now: Timestep) {
        let gamma = self.gamma;
        let weights = self.observer_weights;
        for slots in self.entries.values_mut() {
            for (key, slot) in slots.iter_mut() {
                slot.estimate =
                    estimate_attribute(&slot.history, key.kind, now, gamma, &weights);
            }
        }
    }

    pub fn estimate(&self, worker: &WorkerId, attribute: &AttributeKey) -> Option<&AttributeEstimate> {
        self.entries.get(worker)?.get(attribute)?.estimate.as_ref()
    }

    pub fn history(&self, worker: &WorkerId, attribute: &AttributeKey) -> &[ObservationRecord] {
        self.entries
            .get(worker)
            .and_then(|m| m.get(attribute))
            .map(|s| s.history.as_slice())
            .unwrap_or(&[])
    }

    /// Known estimate mapped onto [0, 1]; unknown attributes fall back to
    /// the scale's median/neutral default with `known = false` so criteria
    /// can raise a human query.
    pub fn query_or_default(&self, worker: &WorkerId, attribute: &AttributeKey) -> (f64, bool) {
        match self.estimate(worker, attribute) {
            Some(est) => (raw_level_to_unit(est.mean, attribute.kind.scale()), true),
            None => (0.5, false),
        }
    }

    /// Every stored observation, in (worker, attribute, insertion) order.
    pub fn all_observations(&self) -> impl Iterator<Item = &ObservationRecord> {
        self.entries
            .values()
            .flat_map(|slots| slots.values().flat_map(|s| s.history.iter()))
    }

    /// Continuous estimate on the level scale, if known.
    pub fn mean_level(&self, worker: &WorkerId, attribute: &AttributeKey) -> Option<f64> {
        self.estimate(worker, attribute).map(|e| e.mean)
    }

    /// Compare estimates against the simulator's ground truth. Every
    /// attribute in `truth` is scored: unknown ones against the default
    /// (median skill level, neutral preference).
    pub fn accuracy_report(
        &self,
        truth: &BTreeMap<WorkerId, TrueAttributes>,
    ) -> AccuracyReport {
        let mut report = AccuracyReport::default();
        let mut sums = [0.0f64; 4];
        let mut counts = [0usize; 4];

        let tally = |acc: &mut KindAccuracy,
                         sum: &mut f64,
                         count: &mut usize,
                         worker: &WorkerId,
                         key: AttributeKey,
                         true_level: i8,
                         default_level: i8| {
            match self.estimate(worker, &key) {
                Some(est) => {
                    if est.rounded == true_level {
                        acc.correct += 1;
                    } else {
                        acc.incorrect += 1;
                    }
                    *sum += f64::from((est.rounded - true_level).abs());
                }
                None => {
                    acc.unknown += 1;
                    *sum += f64::from((default_level - true_level).abs());
                }
            }
            *count += 1;
        };

        for (worker, attrs) in truth {
            for (name, level) in &attrs.hard_skills {
                tally(
                    &mut report.hard_skills,
                    &mut sums[0],
                    &mut counts[0],
                    worker,
                    AttributeKey::hard_skill(name.clone()),
                    level.value() as i8,
                    SKILL_MEDIAN as i8,
                );
            }
            for (name, level) in &attrs.soft_skills {
                tally(
                    &mut report.soft_skills,
                    &mut sums[1],
                    &mut counts[1],
                    worker,
                    AttributeKey::soft_skill(name.clone()),
                    level.value() as i8,
                    SKILL_MEDIAN as i8,
                );
            }
            for (topic, level) in &attrs.task_preferences {
                tally(
                    &mut report.task_preferences,
                    &mut sums[2],
                    &mut counts[2],
                    worker,
                    AttributeKey::task_pref(topic.clone()),
                    level.value(),
                    PREFERENCE_NEUTRAL,
                );
            }
            for (other, level) in &attrs.teammate_preferences {
                tally(
                    &mut report.teammate_preferences,
                    &mut sums[3],
                    &mut counts[3],
                    worker,
                    AttributeKey::teammate_pref(other),
                    level.value(),
                    PREFERENCE_NEUTRAL,
                );
            }
        }

        let maes = [
            &mut report.hard_skills,
            &mut report.soft_skills,
            &mut report.task_preferences,
            &mut report.teammate_preferences,
        ];
        for (i, acc) in maes.into_iter().enumerate() {
            acc.mae = if counts[i] > 0 {
                sums[i] / counts[i] as f64
            } else {
                0.0
            };
        }
        report
    }
}

/// Display helper kept close to the level scales.
pub fn level_name(kind: AttributeKind, level: i8) -> String {
    match kind.scale() {
        Scale::Skill => SkillLevel::new(level.max(0) as u8)
            .map(|l| l.name().to_string())
            .unwrap_or_else(|_| level.to_string()),
        Scale::Preference => PreferenceLevel::new(level)
            .map(|l| l.name().to_string())
            .unwrap_or_else(|_| level.to_string()),
    }
}
