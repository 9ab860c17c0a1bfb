//! Optimal-transport driven exploration for energy-limited robot teams.
//!
//! A reference density is represented by a weighted sample ensemble. Each
//! robot carries a fixed number of robot points (its energy budget) and, step
//! by step, deposits the mass of one robot point onto the nearest remaining
//! sample weight. Trajectories are chosen by a short receding-horizon search
//! that favours nearby, heavy sample points. Progress is tracked with a cheap
//! upper bound on the Wasserstein distance between the robot-point
//! distribution and the reference.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`ot`] | exact transportation solver, single-source plan, bound ledgers |
//! | [`density`] | Gaussian mixtures, sample ensembles, random-walk evolution |
//! | [`planner`] | neighborhood search, candidate paths, goal selection, deposits |
//! | [`coordination`] | agent views, centralized fusion, range-limited exchange |
//! | [`motion`] | motion-controller contract and the first-order controller |
//! | [`sim`] | targets, scenario configuration, runner, snapshots, replay checks |
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coordination;
pub mod density;
pub mod geometry;
pub mod motion;
pub mod ot;
pub mod planner;
pub mod rng;
pub mod sim;

pub use coordination::{AgentView, CommConfig, RoundOrder};
pub use density::{Domain, GaussianMixture, SampleEnsemble};
pub use geometry::Point2;
pub use motion::{FirstOrder, FirstOrderParams, MotionController};
pub use ot::{BoundLedger, TransportPlan, WeightedPointSet};
pub use planner::PlannerParams;
pub use sim::{Mode, RunMetrics, ScenarioConfig, SnapshotRecord, Target};
