//! Attack-resilient trajectory selection for multi-robot target tracking.
//!
//! Each robot picks one trajectory from a small menu (a partition matroid).
//! The team maximizes a monotone submodular tracking objective while an
//! adversary may remove up to `alpha` of the chosen trajectories after seeing
//! them. The crate provides:
//!
//! - [`planner::plan_resilient`], the bait-then-greedy selection rule, plus
//!   greedy, random and brute-force max-min baselines;
//! - exact, greedy and random attack oracles in [`adversary`];
//! - constrained curvature and approximation-bound checks in [`analysis`];
//! - a headless multi-round simulator with Kalman-filtered mobile targets in
//!   [`simulation`];
//! - a seeded, CSV-emitting experiment harness in [`experiment`].

pub mod adversary;
pub mod analysis;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod matroid;
pub mod objective;
pub mod planner;
pub mod seeding;
pub mod simulation;
pub mod suite;

pub use error::{Error, Result};
pub use matroid::{PartitionMatroid, RobotId, TrajectoryId, TrajectorySet};
pub use objective::Objective;
