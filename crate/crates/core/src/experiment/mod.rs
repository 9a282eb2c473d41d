//! Closed-loop experiments: the robot visits an ordered target list while
//! a simulated crowd moves around it, and the two planner arms are
//! compared on time, distance, clearance and risky actions.
//!
//! One control cycle is sense, learn (crowd-sensitive arm only), decide,
//! act. Actions take simulated time; the crowd ticks every `dt` while the
//! action runs, and forward moves are cut short against people as they
//! move.

pub mod stats;
pub mod sweep;
pub mod targets;
pub mod trajectory;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::controller::{forward_limit, sense, Action, Controller, ControllerConfig, DecisionRecord};
use crate::crowd::{Crowd, CrowdScenario, Disc};
use crate::density::{visibility_mask, DensityMap};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_nearest_obstacle, EnvironmentMap, Grid, Point, Pose, Vec2};
use crate::planner::{Planner, PlannerMode};

pub use stats::{MetricComparison, Significance};
pub use sweep::{run_sweep, SweepReport, SweepRow, SweepSpec, SummaryRow};
pub use targets::{generate_target_sets, tour_length, TargetSet};
pub use trajectory::{replay, ReplayMetrics, TrajectoryLog};

/// Robot start on the bundled office map: the middle of the lower hall,
/// facing north.
pub const OFFICE_START: Point = Point { x: 28.5, y: 10.5 };

fn default_epsilon() -> f64 {
    0.5
}
fn default_max_time() -> f64 {
    3000.0
}
fn default_alpha() -> f64 {
    1.0
}
fn default_reps() -> usize {
    1
}
fn default_start() -> Point {
    OFFICE_START
}
fn default_heading() -> f64 {
    std::f64::consts::FRAC_PI_2
}
fn default_dt() -> f64 {
    0.1
}
fn default_cell_size() -> f64 {
    3.0
}
fn default_risky() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: CrowdScenario,
    pub target_set: TargetSet,
    pub planner_mode: PlannerMode,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_reach: f64,
    #[serde(default = "default_max_time")]
    pub max_sim_time: f64,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_start")]
    pub start: Point,
    #[serde(default = "default_heading")]
    pub start_heading: f64,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_cell_size")]
    pub cell_size: f64,
    #[serde(default = "default_risky")]
    pub risky_threshold: f64,
    /// Map file; the bundled office map when absent.
    #[serde(default)]
    pub map: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Office map defaults for the given crowd, target set and planner.
    pub fn office(scenario: CrowdScenario, target_set: TargetSet, planner_mode: PlannerMode) -> Self {
        Self {
            scenario,
            target_set,
            planner_mode,
            alpha: default_alpha(),
            epsilon_reach: default_epsilon(),
            max_sim_time: default_max_time(),
            repetitions: default_reps(),
            base_seed: 0,
            start: default_start(),
            start_heading: default_heading(),
            controller: ControllerConfig::default(),
            dt: default_dt(),
            cell_size: default_cell_size(),
            risky_threshold: default_risky(),
            map: None,
        }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn load_map(&self) -> Result<EnvironmentMap> {
        match &self.map {
            Some(p) => EnvironmentMap::load(p),
            None => Ok(EnvironmentMap::office()),
        }
    }

    /// Checks parameters and that every target is free and reachable in
    /// turn from the start with no crowd.
    pub fn validate(&self, map: &EnvironmentMap, grid: &Grid) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must be in (0, 1], got {}", self.alpha));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.epsilon_reach > 0.0 && self.max_sim_time >= 0.0) {
            return bad("dt and epsilon_reach must be positive, max_sim_time non-negative".into());
        }
        self.scenario.validate(map)?;
        let planner = Planner::new(map, grid);
        let mut from = self.start;
        if !map.contains(from) {
            return Err(Error::OutOfBounds(from));
        }
        for &t in &self.target_set.targets {
            if !map.contains(t) {
                return Err(Error::OutOfBounds(t));
            }
            if map.wall_distance(t) == 0.0 {
                return bad(format!("target ({}, {}) lies on a wall", t.x, t.y));
            }
            planner.plan(PlannerMode::AStar, None, from, t)?;
            from = t;
        }
        Ok(())
    }

    pub fn seed(&self, rep: usize) -> u64 {
        self.base_seed.wrapping_add(rep as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Simulated seconds.
    pub total_time: f64,
    pub total_distance: f64,
    /// Mean distance from the robot to the nearest wall or person, sampled
    /// once per cycle.
    pub clearance: f64,
    /// Cycles in which that distance was below the risky threshold.
    pub risky_actions: u64,
    pub targets_reached: usize,
    pub completed: bool,
    pub cycles: u64,
}

/// Optional outputs of a single run.
#[derive(Debug, Default)]
pub struct RunCapture {
    pub trajectory: Option<TrajectoryLog>,
    pub decisions: Option<Vec<DecisionRecord>>,
    pub density: Option<DensityMap>,
}

impl RunCapture {
    pub fn everything() -> Self {
        Self {
            trajectory: Some(TrajectoryLog::default()),
            decisions: Some(Vec::new()),
            density: None,
        }
    }
}

/// Simulated clock shared by robot and crowd. Crowd ticks fall on integer
/// multiples of `dt`.
struct Clock {
    now: f64,
    ticks: u64,
    dt: f64,
}

impl Clock {
    fn next_tick(&self) -> f64 {
        (self.ticks + 1) as f64 * self.dt
    }
}

/// Runs one action while the crowd keeps moving. Returns the new pose and
/// the distance traveled.
fn execute(
    pose: Pose,
    action: Action,
    map: &EnvironmentMap,
    crowd: &mut Crowd,
    config: &ControllerConfig,
    clock: &mut Clock,
) -> (Pose, f64) {
    const EPS: f64 = 1e-9;
    let end = clock.now + config.duration(action);
    let mut pose = pose;
    let mut traveled = 0.0;
    let mut remaining = if let Action::Forward(d) = action { d } else { 0.0 };
    let mut stopped = false;
    while clock.now < end - EPS {
        let tick = clock.next_tick();
        let (slice_end, ticks) = if tick <= end + EPS { (tick, true) } else { (end, false) };
        let mut velocity = Vec2::ZERO;
        if remaining > 0.0 && !stopped {
            let step = remaining.min((slice_end - clock.now) * config.speed);
            let dir = pose.direction();
            let people = crowd.positions();
            let moved = forward_limit(pose.position, dir, step, map, &people, config.person_radius, config.contact_gap);
            pose = Pose::new(pose.position + dir * moved, pose.heading());
            traveled += moved;
            remaining -= moved;
            if moved < step {
                stopped = true;
            } else {
                velocity = dir * config.speed;
            }
        }
        clock.now = slice_end;
        if ticks {
            let robot = Disc {
                position: pose.position,
                velocity,
                radius: config.person_radius,
                reciprocal: crowd.scenario().avoidance_params.reciprocal_robot,
            };
            crowd.step(map, clock.dt, Some(robot));
            clock.ticks += 1;
        }
    }
    if let Action::Rotate(r) = action {
        pose = pose.rotated(r);
    }
    (pose, traveled)
}

/// One repetition of a configuration.
pub fn run_once(config: &ExperimentConfig, rep: usize, capture: &mut RunCapture) -> Result<RunMetrics> {
    let map = config.load_map()?;
    let grid = Grid::for_map(&map, config.cell_size)?;
    config.validate(&map, &grid)?;
    run_on_map(config, rep, &map, &grid, capture)
}

/// [`run_once`] on an already loaded and validated map.
pub fn run_on_map(
    config: &ExperimentConfig,
    rep: usize,
    map: &EnvironmentMap,
    grid: &Grid,
    capture: &mut RunCapture,
) -> Result<RunMetrics> {
    let mut scenario = config.scenario.clone();
    scenario.seed = config.seed(rep);
    let mut crowd = Crowd::new(scenario, map, grid)?;
    let targets = &config.target_set.targets;
    let cc = &config.controller;
    let mut density = match config.planner_mode {
        PlannerMode::CsAStar => Some(DensityMap::new(*grid, config.alpha)?),
        PlannerMode::AStar => None,
    };

    let mut pose = Pose::new(config.start, config.start_heading);
    let mut clock = Clock {
        now: 0.0,
        ticks: 0,
        dt: config.dt,
    };
    let mut metrics = RunMetrics {
        total_time: 0.0,
        total_distance: 0.0,
        clearance: 0.0,
        risky_actions: 0,
        targets_reached: 0,
        completed: targets.is_empty(),
        cycles: 0,
    };
    let Some(&first) = targets.first() else {
        return Ok(metrics);
    };
    let mut controller = Controller::new(map, grid, cc.clone(), config.planner_mode, first);
    let mut clearance_sum = 0.0;

    while metrics.targets_reached < targets.len() && metrics.total_time < config.max_sim_time {
        let cycle = metrics.cycles;
        let discs: Vec<Disc> = crowd.agents().iter().map(|a| a.disc()).collect();
        let snapshot = sense(&pose, map, &discs, cc, cycle);
        let everyone = crowd.positions();
        let clear = distance_to_nearest_obstacle(pose.position, map, &everyone);
        clearance_sum += clear;
        if clear < config.risky_threshold {
            metrics.risky_actions += 1;
        }
        if let Some(d) = density.as_mut() {
            let visible = visibility_mask(&pose, map, grid, cc.sensor_range, cc.fov());
            d.update(&snapshot.local_crowd, &visible)?;
        }
        let decision = controller.decide(&snapshot, map, density.as_ref());
        if let Some(log) = capture.decisions.as_mut() {
            log.push(controller.record(&snapshot, &decision));
        }
        let sensed_at = (pose.position, pose.heading());
        let (next, traveled) = execute(pose, decision.action, map, &mut crowd, cc, &mut clock);
        if let Some(log) = capture.trajectory.as_mut() {
            log.push_cycle(cycle, metrics.total_time, sensed_at, traveled, &everyone);
        }
        pose = next;
        metrics.total_time += cc.duration(decision.action);
        metrics.total_distance += traveled;
        metrics.cycles += 1;
        controller.observe_outcome(&pose, traveled);
        if pose.position.distance(targets[metrics.targets_reached]) <= config.epsilon_reach {
            metrics.targets_reached += 1;
            if let Some(&t) = targets.get(metrics.targets_reached) {
                controller.set_target(t);
            }
        }
    }
    metrics.completed = metrics.targets_reached == targets.len();
    metrics.clearance = if metrics.cycles == 0 {
        0.0
    } else {
        clearance_sum / metrics.cycles as f64
    };
    capture.density = density;
    Ok(metrics)
}

/// All repetitions of a configuration, in order. Unreachable targets
/// reject the configuration before anything runs.
pub fn run(config: &ExperimentConfig) -> Result<Vec<RunMetrics>> {
    let map = config.load_map()?;
    let grid = Grid::for_map(&map, config.cell_size)?;
    config.validate(&map, &grid)?;
    (0..config.repetitions)
        .map(|rep| run_on_map(config, rep, &map, &grid, &mut RunCapture::default()))
        .collect()
}

/// Baseline (`a`, usually A*) against treatment (`b`, usually CSA*).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub runs_a: usize,
    pub runs_b: usize,
    pub time: MetricComparison,
    pub distance: MetricComparison,
    pub clearance: MetricComparison,
    pub risky_actions: MetricComparison,
}

impl ComparisonReport {
    pub fn metrics(&self) -> [(&'static str, &MetricComparison); 4] {
        [
            ("time", &self.time),
            ("distance", &self.distance),
            ("clearance", &self.clearance),
            ("risky_actions", &self.risky_actions),
        ]
    }
}

pub fn compare(a: &[RunMetrics], b: &[RunMetrics]) -> Result<ComparisonReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("both arms need at least one run".into()));
    }
    let col = |runs: &[RunMetrics], f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    let cmp = |f: fn(&RunMetrics) -> f64| MetricComparison::new(&col(a, f), &col(b, f));
    Ok(ComparisonReport {
        runs_a: a.len(),
        runs_b: b.len(),
        time: cmp(|m| m.total_time),
        distance: cmp(|m| m.total_distance),
        clearance: cmp(|m| m.clearance),
        risky_actions: cmp(|m| m.risky_actions as f64),
    })
}
