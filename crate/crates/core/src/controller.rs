//! Sense, decide and act for the robot.
//!
//! Decisions follow a three-tier hierarchy:
//!
//! 1. Reactive rules in fixed order: Victory (head straight for a visible,
//!    unobstructed target), AvoidObstacles (drop forward moves that come
//!    within the safety margin), Enforcer (head for the furthest visible,
//!    unobstructed plan waypoint).
//! 2. Planning: with no plan in hand the planner builds one and the cycle
//!    ends with a pause.
//! 3. A vote between Greedy (get closer to the next waypoint) and Explorer
//!    (move toward cells not yet visited for this target).
//!
//! People are discs of `person_radius` for both the safety margin and contact.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::crowd::Disc;
use crate::density::{in_sensor_cone, DensityMap, LocalCrowdObservation};
use crate::geometry::{
    angle_difference, cast_rays, line_of_sight, ray_circle_intersection, EnvironmentMap, Grid, Point, Pose, Segment, Vec2,
};
use crate::planner::{Plan, Planner, PlannerMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    /// Drive straight ahead this many meters.
    Forward(f64),
    /// Turn in place by this many radians (counter-clockwise positive).
    Rotate(f64),
    Pause,
}

impl Action {
    pub fn is_forward(&self) -> bool {
        matches!(self, Action::Forward(_))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Forward(d) => write!(f, "forward_{d}"),
            Action::Rotate(r) => write!(f, "rotate_{:+}", r.to_degrees().round()),
            Action::Pause => f.write_str("pause"),
        }
    }
}

/// Ordered action list: forward moves, then rotations, then pause.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<Action>,
}

impl ActionSet {
    pub fn new(forward_moves: &[f64], rotations_deg: &[f64]) -> Self {
        let mut actions: Vec<Action> = forward_moves.iter().map(|&d| Action::Forward(d)).collect();
        actions.extend(rotations_deg.iter().map(|&r| Action::Rotate(r.to_radians())));
        actions.push(Action::Pause);
        Self { actions }
    }

    pub fn from_config(config: &ControllerConfig) -> Self {
        Self::new(&config.forward_moves, &config.rotations_deg)
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

impl Default for ActionSet {
    fn default() -> Self {
        Self::from_config(&ControllerConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub forward_moves: Vec<f64>,
    pub rotations_deg: Vec<f64>,
    /// Forward speed, m/s.
    pub speed: f64,
    /// Rotation speed, degrees per second.
    pub rotation_speed_deg: f64,
    /// Duration of a pause, seconds.
    pub pause_time: f64,
    /// Minimum gap to walls and to the edge of a person, meters.
    pub safety_margin: f64,
    /// Consecutive cycles without translation before the plan is dropped.
    pub replan_after: u32,
    pub sensor_range: f64,
    pub fov_deg: f64,
    /// Laser beams per scan; 0 skips the scan.
    pub laser_rays: usize,
    /// A plan waypoint counts as passed within this distance.
    pub waypoint_reach: f64,
    /// Forward moves stop this far short of contact.
    pub contact_gap: f64,
    /// Contact radius of a person.
    pub person_radius: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            forward_moves: vec![0.1, 0.2, 0.4, 0.8, 1.6],
            rotations_deg: vec![15.0, -15.0, 45.0, -45.0, 90.0, -90.0, 180.0],
            speed: 1.0,
            rotation_speed_deg: 90.0,
            pause_time: 0.1,
            safety_margin: 0.5,
            replan_after: 20,
            sensor_range: 25.0,
            fov_deg: 220.0,
            laser_rays: 660,
            waypoint_reach: 1.0,
            contact_gap: 0.05,
            person_radius: 0.3,
        }
    }
}

impl ControllerConfig {
    pub fn fov(&self) -> f64 {
        self.fov_deg.to_radians()
    }

    pub fn duration(&self, action: Action) -> f64 {
        match action {
            Action::Forward(d) => d / self.speed,
            Action::Rotate(r) => r.abs().to_degrees() / self.rotation_speed_deg,
            Action::Pause => self.pause_time,
        }
    }

    /// Half the smallest rotation: within this heading error the robot
    /// drives rather than turns when approaching a point.
    fn heading_tolerance(&self) -> f64 {
        self.rotations_deg
            .iter()
            .map(|r| r.abs())
            .fold(f64::INFINITY, f64::min)
            .to_radians()
            / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenseSnapshot {
    pub pose: Pose,
    pub laser: Vec<f64>,
    pub local_crowd: LocalCrowdObservation,
    /// Velocity of each sensed person, aligned with `local_crowd.people`.
    pub motion: Vec<Vec2>,
    pub cycle: u64,
}

/// True iff a person at `p` is within range, inside the field of view and
/// in line of sight.
pub fn person_visible(pose: &Pose, p: Point, map: &EnvironmentMap, range: f64, fov: f64) -> bool {
    in_sensor_cone(pose, p, range, fov) && line_of_sight(pose.position, p, map)
}

pub fn sense(pose: &Pose, map: &EnvironmentMap, people: &[Disc], config: &ControllerConfig, cycle: u64) -> SenseSnapshot {
    let fov = config.fov();
    let laser = if config.laser_rays > 0 {
        cast_rays(pose, config.sensor_range, fov, config.laser_rays, map)
    } else {
        Vec::new()
    };
    let seen: Vec<&Disc> = people
        .iter()
        .filter(|d| person_visible(pose, d.position, map, config.sensor_range, fov))
        .collect();
    SenseSnapshot {
        pose: *pose,
        laser,
        local_crowd: LocalCrowdObservation {
            cycle,
            people: seen.iter().map(|d| d.position).collect(),
            robot_pose: *pose,
        },
        motion: seen.iter().map(|d| d.velocity).collect(),
        cycle,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionState {
    pub current_target: Point,
    pub plan: Option<Plan>,
    /// Index of the next unpassed waypoint in `plan`.
    pub next_waypoint: usize,
    pub visited_cells: BTreeSet<crate::geometry::CellIndex>,
    pub blocked_cycles: u32,
}

impl DecisionState {
    pub fn new(target: Point) -> Self {
        Self {
            current_target: target,
            plan: None,
            next_waypoint: 0,
            visited_cells: BTreeSet::new(),
            blocked_cycles: 0,
        }
    }

    pub fn remaining_waypoints(&self) -> &[Point] {
        match &self.plan {
            Some(p) => &p.waypoints[self.next_waypoint.min(p.waypoints.len())..],
            None => &[],
        }
    }

    /// The point Greedy steers toward: the next waypoint, else the target.
    pub fn greedy_goal(&self) -> Point {
        self.remaining_waypoints().first().copied().unwrap_or(self.current_target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Victory,
    AvoidObstacles,
    Enforcer,
    Planner,
    Vote,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Victory => "victory",
            Tier::AvoidObstacles => "avoid_obstacles",
            Tier::Enforcer => "enforcer",
            Tier::Planner => "planner",
            Tier::Vote => "vote",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tier1Outcome {
    Chosen { action: Action, by: Tier },
    Survivors(Vec<Action>),
}

/// Shortest distance from the straight sweep `from`-`to` to any wall or to
/// the edge of a sensed person.
pub fn sweep_clearance(from: Point, to: Point, map: &EnvironmentMap, people: &[Point], person_radius: f64) -> f64 {
    let seg = Segment::new(from, to);
    people
        .iter()
        .map(|p| (seg.distance_to_point(*p) - person_radius).max(0.0))
        .fold(map.segment_clearance(from, to), f64::min)
}

/// How far a forward move of `distance` along `dir` gets before touching a
/// wall or a person disc, less `gap`.
pub fn forward_limit(
    from: Point,
    dir: Vec2,
    distance: f64,
    map: &EnvironmentMap,
    people: &[Point],
    person_radius: f64,
    gap: f64,
) -> f64 {
    let mut limit = distance;
    for w in map.obstacles() {
        if let Some(s) = w.ray_intersection(from, dir) {
            limit = limit.min(s - gap);
        }
    }
    for &c in people {
        let inside = from.distance(c) < person_radius;
        if inside {
            // already overlapping: only moves away from the center are free
            if dir.dot(c - from) > 0.0 {
                limit = 0.0;
            }
        } else if let Some(s) = ray_circle_intersection(from, dir, c, person_radius) {
            limit = limit.min(s - gap);
        }
    }
    limit.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActOutcome {
    pub pose: Pose,
    /// Distance actually traveled.
    pub distance: f64,
    /// Time the action consumed.
    pub duration: f64,
    pub truncated: bool,
}

/// Applies an action against a static world.
pub fn act(pose: &Pose, action: Action, map: &EnvironmentMap, people: &[Point], config: &ControllerConfig) -> ActOutcome {
    let duration = config.duration(action);
    match action {
        Action::Forward(d) => {
            let dir = pose.direction();
            let travel = forward_limit(pose.position, dir, d, map, people, config.person_radius, config.contact_gap);
            ActOutcome {
                pose: Pose::new(pose.position + dir * travel, pose.heading()),
                distance: travel,
                duration,
                truncated: travel < d,
            }
        }
        Action::Rotate(r) => ActOutcome {
            pose: pose.rotated(r),
            distance: 0.0,
            duration,
            truncated: false,
        },
        Action::Pause => ActOutcome {
            pose: *pose,
            distance: 0.0,
            duration,
            truncated: false,
        },
    }
}

/// Pose after an action simulated against a snapshot.
fn predicted_pose(snapshot: &SenseSnapshot, action: Action, map: &EnvironmentMap, config: &ControllerConfig) -> Pose {
    act(&snapshot.pose, action, map, &snapshot.local_crowd.people, config).pose
}

/// Action from `candidates` that best approaches `goal`: turn toward it
/// until within the heading tolerance, then take the move that ends
/// closest to it. Ties go to the earlier action.
fn approach(snapshot: &SenseSnapshot, goal: Point, candidates: &[Action], map: &EnvironmentMap, config: &ControllerConfig) -> Option<Action> {
    let pose = snapshot.pose;
    let offset = goal - pose.position;
    let err = angle_difference(pose.heading(), offset.angle());
    let mut best: Option<(f64, Action)> = None;
    let mut consider = |score: f64, a: Action| {
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, a));
        }
    };
    if err.abs() <= config.heading_tolerance() {
        for &a in candidates.iter().filter(|a| !matches!(a, Action::Rotate(_))) {
            consider(predicted_pose(snapshot, a, map, config).position.distance(goal), a);
        }
    } else {
        for &a in candidates {
            if let Action::Rotate(r) = a {
                consider(angle_difference(r, err).abs(), a);
            }
        }
    }
    best.map(|(_, a)| a)
}

/// Goal is within range, in line of sight, and the straight line to it
/// keeps the safety margin.
fn clear_shot(snapshot: &SenseSnapshot, goal: Point, map: &EnvironmentMap, config: &ControllerConfig) -> bool {
    let from = snapshot.pose.position;
    from.distance(goal) <= config.sensor_range
        && line_of_sight(from, goal, map)
        && sweep_clearance(from, goal, map, &snapshot.local_crowd.people, config.person_radius) >= config.safety_margin
}

/// Forward moves whose sweep would come within the margin of a wall or a
/// sensed person (and closer than the robot already is) are removed.
pub fn avoid_obstacles(snapshot: &SenseSnapshot, actions: &[Action], map: &EnvironmentMap, config: &ControllerConfig) -> Vec<Action> {
    let from = snapshot.pose.position;
    let people = &snapshot.local_crowd.people;
    let start = sweep_clearance(from, from, map, people, config.person_radius);
    actions
        .iter()
        .copied()
        .filter(|&a| match a {
            Action::Forward(d) => {
                let to = from + snapshot.pose.direction() * d;
                let c = sweep_clearance(from, to, map, people, config.person_radius);
                c >= config.safety_margin || c >= start
            }
            _ => true,
        })
        .collect()
}

/// Tier 1. Returns the chosen action or the actions that survived
/// AvoidObstacles. Victory and Enforcer only choose among survivors.
pub fn tier1(
    snapshot: &SenseSnapshot,
    state: &mut DecisionState,
    actions: &ActionSet,
    map: &EnvironmentMap,
    config: &ControllerConfig,
) -> Tier1Outcome {
    let survivors = avoid_obstacles(snapshot, actions.actions(), map, config);
    if clear_shot(snapshot, state.current_target, map, config) {
        if let Some(action) = approach(snapshot, state.current_target, &survivors, map, config) {
            return Tier1Outcome::Chosen { action, by: Tier::Victory };
        }
    }
    if survivors.len() == 1 {
        return Tier1Outcome::Chosen {
            action: survivors[0],
            by: Tier::AvoidObstacles,
        };
    }
    let remaining = state.remaining_waypoints();
    if let Some(j) = (0..remaining.len()).rev().find(|&j| clear_shot(snapshot, remaining[j], map, config)) {
        if let Some(action) = approach(snapshot, remaining[j], &survivors, map, config) {
            state.next_waypoint += j;
            return Tier1Outcome::Chosen { action, by: Tier::Enforcer };
        }
    }
    Tier1Outcome::Survivors(survivors)
}

/// Tier 2. Builds a plan from the robot's position to the current target.
pub fn tier2(
    state: &mut DecisionState,
    planner: &Planner,
    mode: PlannerMode,
    density: Option<&DensityMap>,
    pose: &Pose,
) -> crate::Result<()> {
    let plan = planner.plan(mode, density, pose.position, state.current_target)?;
    state.plan = Some(plan);
    state.next_waypoint = 0;
    Ok(())
}

/// Min-max normalization; constant scores map to 0.5.
pub fn normalize_scores(scores: &[f64]) -> Vec<f64> {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        scores.iter().map(|s| (s - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; scores.len()]
    }
}

/// Greedy: negative distance from the predicted position to the goal.
pub fn greedy_scores(snapshot: &SenseSnapshot, goal: Point, actions: &[Action], map: &EnvironmentMap, config: &ControllerConfig) -> Vec<f64> {
    actions
        .iter()
        .map(|&a| -predicted_pose(snapshot, a, map, config).position.distance(goal))
        .collect()
}

/// Explorer: share of the 8-neighborhood of the predicted cell that has
/// not been visited.
pub fn explorer_scores(
    snapshot: &SenseSnapshot,
    visited: &BTreeSet<crate::geometry::CellIndex>,
    grid: &Grid,
    actions: &[Action],
    map: &EnvironmentMap,
    config: &ControllerConfig,
) -> Vec<f64> {
    actions
        .iter()
        .map(|&a| {
            let p = predicted_pose(snapshot, a, map, config).position;
            let Ok(cell) = grid.world_to_cell(p) else {
                return 0.0;
            };
            let (fresh, total) = grid
                .neighbors(cell)
                .fold((0usize, 0usize), |(f, t), n| (f + usize::from(!visited.contains(&n)), t + 1));
            if total == 0 {
                0.0
            } else {
                fresh as f64 / total as f64
            }
        })
        .collect()
}

/// Tier 3. Sum of the normalized Greedy and Explorer scores; the first
/// action with the highest vote wins.
pub fn tier3(
    snapshot: &SenseSnapshot,
    state: &DecisionState,
    survivors: &[Action],
    grid: &Grid,
    map: &EnvironmentMap,
    config: &ControllerConfig,
) -> Action {
    let greedy = normalize_scores(&greedy_scores(snapshot, state.greedy_goal(), survivors, map, config));
    let explorer = normalize_scores(&explorer_scores(snapshot, &state.visited_cells, grid, survivors, map, config));
    let mut best = 0;
    let mut best_vote = f64::NEG_INFINITY;
    for (i, (g, e)) in greedy.iter().zip(&explorer).enumerate() {
        let vote = g + e;
        if vote > best_vote {
            best = i;
            best_vote = vote;
        }
    }
    survivors.get(best).copied().unwrap_or(Action::Pause)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub tier: Tier,
    /// Actions left after AvoidObstacles (full set if it did not run).
    pub surviving: usize,
}

/// One row of the per-cycle debug log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub cycle: u64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub tier: Tier,
    pub action: String,
    pub surviving: usize,
    pub plan_length: usize,
}

/// Decision-making half of the robot: owns the plan, the visit record and
/// the blocked-cycle counter for the current target.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    actions: ActionSet,
    mode: PlannerMode,
    planner: Planner,
    state: DecisionState,
}

impl Controller {
    pub fn new(map: &EnvironmentMap, grid: &Grid, config: ControllerConfig, mode: PlannerMode, target: Point) -> Self {
        Self {
            actions: ActionSet::from_config(&config),
            config,
            mode,
            planner: Planner::new(map, grid),
            state: DecisionState::new(target),
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn mode(&self) -> PlannerMode {
        self.mode
    }

    pub fn state(&self) -> &DecisionState {
        &self.state
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    /// Switches to a new target, dropping the plan and the visit record.
    pub fn set_target(&mut self, target: Point) {
        self.state = DecisionState::new(target);
    }

    pub fn decide(&mut self, snapshot: &SenseSnapshot, map: &EnvironmentMap, density: Option<&DensityMap>) -> Decision {
        let outcome = tier1(snapshot, &mut self.state, &self.actions, map, &self.config);
        let survivors = match outcome {
            Tier1Outcome::Chosen { action, by } => {
                let surviving = if by == Tier::AvoidObstacles { 1 } else { self.actions.len() };
                return Decision { action, tier: by, surviving };
            }
            Tier1Outcome::Survivors(s) => s,
        };
        if self.state.plan.is_none() {
            // a failed plan leaves the state untouched and is retried next cycle
            let _ = tier2(&mut self.state, &self.planner, self.mode, density, &snapshot.pose);
            return Decision {
                action: Action::Pause,
                tier: Tier::Planner,
                surviving: survivors.len(),
            };
        }
        let action = tier3(snapshot, &self.state, &survivors, self.planner.grid(), map, &self.config);
        Decision {
            action,
            tier: Tier::Vote,
            surviving: survivors.len(),
        }
    }

    /// Book-keeping after the action ran: visited cells, passed waypoints
    /// and the blocked-cycle replan trigger.
    pub fn observe_outcome(&mut self, pose: &Pose, translated: f64) {
        if let Ok(cell) = self.planner.grid().world_to_cell(pose.position) {
            self.state.visited_cells.insert(cell);
        }
        let reach = self.config.waypoint_reach;
        while let Some(w) = self.state.remaining_waypoints().first() {
            if w.distance(pose.position) <= reach && self.state.remaining_waypoints().len() > 1 {
                self.state.next_waypoint += 1;
            } else {
                break;
            }
        }
        if translated > 0.0 {
            self.state.blocked_cycles = 0;
        } else {
            self.state.blocked_cycles += 1;
            if self.state.blocked_cycles >= self.config.replan_after {
                self.state.plan = None;
                self.state.next_waypoint = 0;
                self.state.blocked_cycles = 0;
            }
        }
    }

    pub fn record(&self, snapshot: &SenseSnapshot, decision: &Decision) -> DecisionRecord {
        DecisionRecord {
            cycle: snapshot.cycle,
            x: snapshot.pose.position.x,
            y: snapshot.pose.position.y,
            heading: snapshot.pose.heading(),
            tier: decision.tier,
            action: decision.action.to_string(),
            surviving: decision.surviving,
            plan_length: self.state.remaining_waypoints().len(),
        }
    }
}
