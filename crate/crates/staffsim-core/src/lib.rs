//! Deterministic workforce staffing and profiling engine.
//!
//! The crate is `no_std` (alloc required): all state lives in value types
//! backed by ordered collections so that runs serialize byte-identically.
//! IO, randomness and the simulation harness live in the `staffsim`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod calendar;
pub mod criteria;
pub mod domain;
pub mod profiling;
pub mod rescheduler;
pub mod scheduler;

pub use domain::{
    Interval, PreferenceLevel, Schedule, SkillLevel, TaskId, TaskSpec, Timestep, Timing,
    TrueAttributes, Tso, WorkerId, WorkerState,
};
