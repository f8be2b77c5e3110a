//! Named, independently seeded random streams plus the fixed observer
//! bias table. Every stream is derived from the run seed and a label so
//! that changing one config knob never perturbs unrelated draws.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use staffsim_core::{Timestep, WorkerId};

/// FNV-1a over the label bytes; stable across platforms.
pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A ChaCha stream bound to `(seed, label)`.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(label.as_bytes()))
}

/// The simulator's independent randomness sources. Serialized with the
/// state so a snapshot resumes mid-run bit-exactly.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RngStreams {
    pub arrivals: ChaCha8Rng,
    pub task_content: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub acceptance: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        RngStreams {
            arrivals: stream(seed, "arrivals"),
            task_content: stream(seed, "task_content"),
            noise: stream(seed, "noise"),
            acceptance: stream(seed, "acceptance"),
        }
    }
}

/// Fixed Gaussian offset each observer applies when judging one worker's
/// one skill. Draws are pure functions of `(seed, observer, target,
/// skill)`, memoized only to avoid rehashing.
#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct BiasTable {
    pub seed: u64,
    pub sigma_b: f64,
    /// Step from which all biases are forced to zero.
    pub bias_off_at: Option<Timestep>,
    #[serde(skip)]
    cache: BTreeMap<(WorkerId, WorkerId, String), f64>,
}

impl BiasTable {
    pub fn new(seed: u64, sigma_b: f64, bias_off_at: Option<Timestep>) -> Self {
        BiasTable {
            seed,
            sigma_b,
            bias_off_at,
            cache: BTreeMap::new(),
        }
    }

    fn draw(&self, observer: &WorkerId, target: &WorkerId, skill: &str) -> f64 {
        let label = format!("bias|{observer}|{target}|{skill}");
        let mut rng = stream(self.seed, &label);
        let z: f64 = StandardNormal.sample(&mut rng);
        z * self.sigma_b
    }

    /// Bias applied at step `now`; zero once the unbiased regime starts.
    pub fn bias(
        &mut self,
        observer: &WorkerId,
        target: &WorkerId,
        skill: &str,
        now: Timestep,
    ) -> f64 {
        if self.bias_off_at.is_some_and(|off| now >= off) {
            return 0.0;
        }
        let key = (observer.clone(), target.clone(), skill.to_string());
        if let Some(&b) = self.cache.get(&key) {
            return b;
        }
        let b = self.draw(observer, target, skill);
        self.cache.insert(key, b);
        b
    }
}

/// One draw from N(0, sigma^2); zero draws are skipped entirely when
/// sigma is zero so stream positions stay comparable across configs.
pub fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    z * sigma
}

/// Poisson draw with a zero-rate guard.
pub fn poisson(rng: &mut ChaCha8Rng, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let dist = rand_distr::Poisson::new(rate).expect("validated rate");
    dist.sample(rng) as u64
}

/// Uniform integer in `[lo, hi]`.
pub fn uniform_u32(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> u32 {
    rng.random_range(lo..=hi)
}
