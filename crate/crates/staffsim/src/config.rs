//! Run configuration with serde defaults so partial JSON files work.

use serde::{Deserialize, Serialize};
use staffsim_core::criteria::WeightVector;
use staffsim_core::Timestep;
use thiserror::Error;

fn default_roles() -> Vec<String> {
    ["analyst", "developer", "designer", "tester", "manager"]
        .map(String::from)
        .to_vec()
}

fn default_soft_skills() -> Vec<String> {
    [
        "adaptability",
        "communication",
        "creativity",
        "critical_thinking",
        "empathy",
        "initiative",
        "leadership",
        "negotiation",
        "organization",
        "problem_solving",
        "teamwork",
        "time_management",
    ]
    .map(String::from)
    .to_vec()
}

fn default_topics() -> Vec<String> {
    [
        "analytics",
        "api_design",
        "backend",
        "cloud",
        "compliance",
        "database",
        "devops",
        "documentation",
        "frontend",
        "integration",
        "machine_learning",
        "migration",
        "mobile",
        "networking",
        "performance",
        "research",
        "security",
        "support",
        "testing",
        "ui_design",
    ]
    .map(String::from)
    .to_vec()
}

fn d_workers() -> usize {
    2
}
fn d_hard_skills() -> usize {
    10
}
fn d_sigma() -> f64 {
    1.5
}
fn d_gamma() -> f64 {
    0.99
}
fn d_arrival_rate() -> f64 {
    0.6
}
fn d_duration_range() -> [Timestep; 2] {
    [2, 10]
}
fn d_max_team() -> usize {
    3
}
fn d_batch() -> usize {
    5
}
fn d_steps() -> Timestep {
    400
}
fn d_reject_scale() -> f64 {
    0.5
}
fn d_p_max() -> u32 {
    5
}
fn d_fulltime_prob() -> f64 {
    0.8
}
fn d_subsample() -> f64 {
    1.0
}
fn d_beam() -> usize {
    3
}
fn d_horizon() -> Timestep {
    200
}
fn d_team_cap() -> usize {
    10_000
}
fn d_resched() -> usize {
    50
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_roles")]
    pub roles: Vec<String>,
    /// Workers generated per (role, seniority) pair.
    #[serde(default = "d_workers")]
    pub workers_per_role_per_seniority: usize,
    #[serde(default = "d_hard_skills")]
    pub hard_skills_per_role: usize,
    #[serde(default = "default_soft_skills")]
    pub soft_skill_names: Vec<String>,
    #[serde(default = "default_topics")]
    pub topic_names: Vec<String>,
    /// Standard deviation of the fixed per-(observer, worker, skill) bias.
    #[serde(default = "d_sigma")]
    pub sigma_b: f64,
    /// Standard deviation of the per-observation noise.
    #[serde(default = "d_sigma")]
    pub sigma_v: f64,
    /// Extra noise applied when feedback text is turned back into levels.
    #[serde(default)]
    pub sigma_r: f64,
    /// Recency discount of the profiling store.
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    /// Mean task arrivals per step.
    #[serde(default = "d_arrival_rate")]
    pub arrival_rate: f64,
    /// Inclusive bounds on generated task durations.
    #[serde(default = "d_duration_range")]
    pub duration_range: [Timestep; 2],
    #[serde(default = "d_max_team")]
    pub max_team_size: usize,
    /// Pending-queue size that triggers a staffing round.
    #[serde(default = "d_batch")]
    pub batch_trigger: usize,
    #[serde(default = "d_steps")]
    pub total_steps: Timestep,
    /// From this step on, all observation biases are forced to zero.
    #[serde(default)]
    pub bias_off_at: Option<Timestep>,
    /// Scales the rejection probability derived from topic aversion.
    #[serde(default = "d_reject_scale")]
    pub reject_scale: f64,
    #[serde(default = "d_p_max")]
    pub p_max: u32,
    #[serde(default = "d_fulltime_prob")]
    pub fulltime_prob: f64,
    /// Probability that a task topic makes it into proposal feedback.
    #[serde(default = "d_subsample")]
    pub proposal_subsample: f64,
    #[serde(default)]
    pub weights: WeightVector,
    #[serde(default = "d_beam")]
    pub beam_width: usize,
    #[serde(default = "d_horizon")]
    pub planning_horizon: Timestep,
    #[serde(default = "d_team_cap")]
    pub team_enumeration_cap: usize,
    #[serde(default = "d_resched")]
    pub max_reschedule_attempts: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are total")
    }
}

#[derive(Error, Debug)]
#[error("config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

fn fail(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        reason: reason.into(),
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.roles.is_empty() {
            return Err(fail("roles", "at least one role is required"));
        }
        if self.workers_per_role_per_seniority == 0 {
            return Err(fail("workers_per_role_per_seniority", "must be >= 1"));
        }
        if self.hard_skills_per_role == 0 {
            return Err(fail("hard_skills_per_role", "must be >= 1"));
        }
        if self.topic_names.is_empty() {
            return Err(fail("topic_names", "at least one topic is required"));
        }
        for (field, v) in [
            ("sigma_b", self.sigma_b),
            ("sigma_v", self.sigma_v),
            ("sigma_r", self.sigma_r),
            ("arrival_rate", self.arrival_rate),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(fail(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(fail("gamma", format!("must be in (0, 1], got {}", self.gamma)));
        }
        let [lo, hi] = self.duration_range;
        if lo < 1 || lo > hi {
            return Err(fail(
                "duration_range",
                format!("need 1 <= lo <= hi, got [{lo}, {hi}]"),
            ));
        }
        if self.max_team_size == 0 {
            return Err(fail("max_team_size", "must be >= 1"));
        }
        if self.batch_trigger == 0 {
            return Err(fail("batch_trigger", "must be >= 1"));
        }
        if let Some(off) = self.bias_off_at {
            if off > self.total_steps {
                return Err(fail(
                    "bias_off_at",
                    format!("{off} exceeds total_steps = {}", self.total_steps),
                ));
            }
        }
        for (field, v) in [
            ("reject_scale", self.reject_scale),
            ("fulltime_prob", self.fulltime_prob),
            ("proposal_subsample", self.proposal_subsample),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(fail(field, format!("must be in [0, 1], got {v}")));
            }
        }
        if self.p_max < 1 {
            return Err(fail("p_max", "must be >= 1"));
        }
        if self.weights.is_degenerate() {
            return Err(fail("weights", "all weights are zero"));
        }
        if self.beam_width == 0 {
            return Err(fail("beam_width", "must be >= 1"));
        }
        if self.planning_horizon < hi {
            return Err(fail(
                "planning_horizon",
                "must cover the longest task duration",
            ));
        }
        if self.team_enumeration_cap == 0 {
            return Err(fail("team_enumeration_cap", "must be >= 1"));
        }
        if self.max_reschedule_attempts == 0 {
            return Err(fail("max_reschedule_attempts", "must be >= 1"));
        }
        Ok(())
    }

    /// Hard skill names attached to one role.
    pub fn hard_skills_of(&self, role: &str) -> Vec<String> {
        (1..=self.hard_skills_per_role)
            .map(|i| format!("{role}_s{i:02}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_scale() {
        let cfg = EnvConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.roles.len(), 5);
        assert_eq!(cfg.soft_skill_names.len(), 12);
        assert_eq!(cfg.topic_names.len(), 20);
        assert_eq!(cfg.workers_per_role_per_seniority, 2);
        assert_eq!(cfg.duration_range, [2, 10]);
        assert_eq!((cfg.sigma_b, cfg.sigma_v), (1.5, 1.5));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: EnvConfig = serde_json::from_str(r#"{"seed": 7, "arrival_rate": 1.0}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.arrival_rate, 1.0);
        assert_eq!(cfg.batch_trigger, 5);
    }

    #[test]
    fn bad_fields_rejected() {
        let cfg = EnvConfig {
            workers_per_role_per_seniority: 0,
            ..EnvConfig::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = EnvConfig {
            gamma: 0.0,
            ..EnvConfig::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = EnvConfig {
            duration_range: [5, 2],
            ..EnvConfig::default()
        };
        assert!(cfg.validate().is_err());

        let mut cfg = EnvConfig::default();
        cfg.bias_off_at = Some(cfg.total_steps + 1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(serde_json::from_str::<EnvConfig>(r#"{"sigma_x": 1}"#).is_err());
    }
}
