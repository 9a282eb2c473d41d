//! Crowd-aware navigation for a mobile robot.
//!
//! The robot learns where people tend to be from its own partial sensing,
//! folds that into a grid graph as extra edge cost, and plans around busy
//! areas with A*. A seeded pedestrian simulator and a closed-loop harness
//! compare crowd-aware planning against plain A*.
//!
//! Module map:
//! - [`geometry`]: points, poses, walls, line of sight, ray casting, grid
//! - [`density`]: decaying per-cell crowd density learned from observations
//! - [`planner`]: grid graph, density reweighting, A*
//! - [`crowd`]: pedestrian simulation with sampled velocity obstacles
//! - [`controller`]: tiered reactive controller with a fixed action set
//! - [`experiment`]: closed-loop runs, sweeps, statistics, replay

pub mod assets;
pub mod controller;
pub mod crowd;
pub mod density;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod planner;

pub use error::{Error, Result};
