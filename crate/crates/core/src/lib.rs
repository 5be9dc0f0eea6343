//! Sample multiple reuse (SMR) for off-policy reinforcement learning.
//!
//! SMR updates an agent `M` times on each sampled transition or batch instead
//! of once. This crate provides:
//!
//! * [`envs`]: finite MDPs (cliff walking, random mazes, random MDPs), a
//!   point-mass continuous-control task and a value-iteration solver.
//! * [`tabular`]: Q-learning and Q-SMR, the expanded and closed-form update
//!   rules, effective learning rates and learning-rate schedules.
//! * [`neural`]: a small hand-written dense network, replay buffer and a
//!   TD3-lite actor-critic with the SMR inner loop.
//! * [`harness`]: configuration, seeded experiment runs, CSV learning curves,
//!   normalized estimation bias and the verification suites behind the CLI.

pub mod envs;
pub mod error;
pub mod harness;
pub mod neural;
pub mod seeding;
pub mod tabular;

pub use error::{Error, Result};
