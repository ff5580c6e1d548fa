//! Joint UAV relay placement and uplink power control maximizing the
//! average secrecy rate of a mobile user cluster against the strongest of
//! several ground eavesdroppers.
//!
//! The solver alternates between two blocks: a successive convex
//! approximation step for the per-slot UAV position ([`position_opt`]) and a
//! closed-form secure water-filling step for the users' powers
//! ([`power_opt`]). [`oracle`] holds brute-force references used to check
//! both.

pub mod channel;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod position_opt;
pub mod power_opt;
pub mod scenario;
pub mod solver;

pub use channel::{ChannelParams, LinkGains};
pub use error::{Error, Result};
pub use power_opt::{PowerConstraints, PowerPolicy};
pub use scenario::{Point2, Scenario, ScenarioConfig, UavTrajectory, Vec3};
pub use solver::{run_algorithm1, run_baseline, SolveResult, SolverConfig, Strategy};
