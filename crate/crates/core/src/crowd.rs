//! Seeded pedestrian crowd.
//!
//! Each person walks an A* plan toward a target chosen by a behavior
//! automaton and resolves conflicts with a sampled velocity-obstacle rule:
//! a fixed fan of candidate velocities is tested for time to collision
//! against nearby people, the robot, and walls, and the admissible
//! candidate nearest the preferred velocity wins.
//!
//! All agents read the pre-step state and then commit together, so a step
//! is independent of agent order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{line_of_sight, ray_circle_intersection, EnvironmentMap, Grid, Point, Segment, Vec2};
use crate::planner::{PlannerMode, Planner};

pub const UPPER_LEFT: usize = 0;
pub const LOWER_LEFT: usize = 1;
pub const UPPER_RIGHT: usize = 2;
pub const LOWER_RIGHT: usize = 3;

/// Sentinel state of an agent that has not picked a target yet.
pub const NO_STATE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Behavior {
    Random,
    #[serde(alias = "zig-zag")]
    ZigZag,
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Behavior::Random => "random",
            Behavior::ZigZag => "zigzag",
        })
    }
}

impl FromStr for Behavior {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Behavior::Random),
            "zigzag" | "zig-zag" => Ok(Behavior::ZigZag),
            other => Err(Error::InvalidParameter(format!("unknown behavior {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Avoidance {
    VoSample,
    None,
}

impl fmt::Display for Avoidance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Avoidance::VoSample => "vo_sample",
            Avoidance::None => "none",
        })
    }
}

impl FromStr for Avoidance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vo_sample" | "vo" => Ok(Avoidance::VoSample),
            "none" => Ok(Avoidance::None),
            other => Err(Error::InvalidParameter(format!("unknown avoidance {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Destinations used by the two behaviors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorWaypoints {
    /// Candidate destinations of the random behavior.
    pub random: Vec<Point>,
    pub upper_left: Vec<Point>,
    pub lower_left: Vec<Point>,
    pub upper_right: Vec<Point>,
    pub lower_right: Vec<Point>,
}

impl BehaviorWaypoints {
    /// Corner points inset 3 m, two hall points at a third and two thirds of
    /// the width, and three points 3 m apart in each corner region.
    pub fn for_extent(width: f64, height: f64) -> Self {
        let (w, h) = (width, height);
        let p = Point::new;
        Self {
            random: vec![
                p(3.0, 3.0),
                p(w - 3.0, 3.0),
                p(3.0, h - 3.0),
                p(w - 3.0, h - 3.0),
                p(w / 3.0, h / 2.0),
                p(2.0 * w / 3.0, h / 2.0),
            ],
            upper_left: vec![p(3.0, h - 3.0), p(6.0, h - 3.0), p(3.0, h - 6.0)],
            lower_left: vec![p(3.0, 3.0), p(6.0, 3.0), p(3.0, 6.0)],
            upper_right: vec![p(w - 3.0, h - 3.0), p(w - 6.0, h - 3.0), p(w - 3.0, h - 6.0)],
            lower_right: vec![p(w - 3.0, 3.0), p(w - 6.0, 3.0), p(w - 3.0, 6.0)],
        }
    }

    pub fn region(&self, state: usize) -> &[Point] {
        match state {
            UPPER_LEFT => &self.upper_left,
            LOWER_LEFT => &self.lower_left,
            UPPER_RIGHT => &self.upper_right,
            _ => &self.lower_right,
        }
    }

    fn all(&self) -> impl Iterator<Item = &Point> {
        self.random
            .iter()
            .chain(&self.upper_left)
            .chain(&self.lower_left)
            .chain(&self.upper_right)
            .chain(&self.lower_right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentParams {
    pub radius: f64,
    pub preferred_speed: f64,
    /// Distance at which a person counts as having reached its target.
    pub target_tolerance: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            radius: 0.3,
            preferred_speed: 1.4,
            target_tolerance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AvoidanceParams {
    /// Candidates colliding sooner than this (seconds) are rejected.
    pub horizon: f64,
    /// When only standing still survives, the horizon is halved down to
    /// this value before giving up.
    pub min_horizon: f64,
    /// Only people within this distance are considered.
    pub neighbor_radius: f64,
    pub directions: usize,
    /// Candidate speeds as fractions of the preferred speed.
    pub speed_fractions: Vec<f64>,
    /// Agents expect the robot to share avoidance with them.
    pub reciprocal_robot: bool,
}

impl Default for AvoidanceParams {
    fn default() -> Self {
        Self {
            horizon: 2.0,
            min_horizon: 0.25,
            neighbor_radius: 3.0,
            directions: 16,
            speed_fractions: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            reciprocal_robot: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdScenario {
    pub crowd_size: usize,
    pub behavior: Behavior,
    pub avoidance: Avoidance,
    pub seed: u64,
    pub spawn_region: Rect,
    pub waypoints: BehaviorWaypoints,
    #[serde(default)]
    pub agent: AgentParams,
    #[serde(default)]
    pub avoidance_params: AvoidanceParams,
}

impl CrowdScenario {
    /// Default scenario for a map: spawn in the 12 m lower-left corner and
    /// the standard behavior waypoints.
    pub fn for_map(map: &EnvironmentMap, crowd_size: usize, behavior: Behavior, avoidance: Avoidance, seed: u64) -> Self {
        let (w, h) = (map.width(), map.height());
        Self {
            crowd_size,
            behavior,
            avoidance,
            seed,
            spawn_region: Rect::new(Point::new(0.5, 0.5), Point::new(w.min(12.0) - 0.5, h.min(12.0) - 0.5)),
            waypoints: BehaviorWaypoints::for_extent(w, h),
            agent: AgentParams::default(),
            avoidance_params: AvoidanceParams::default(),
        }
    }

    pub fn validate(&self, map: &EnvironmentMap) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.agent.radius > 0.0 && self.agent.preferred_speed > 0.0 && self.agent.target_tolerance > 0.0) {
            return bad("agent radius, speed and target tolerance must be positive");
        }
        if self.avoidance_params.horizon.is_nan() || self.avoidance_params.horizon <= 0.0 || self.avoidance_params.directions == 0 {
            return bad("avoidance horizon and direction count must be positive");
        }
        if !(map.contains(self.spawn_region.min) && map.contains(self.spawn_region.max))
            || self.spawn_region.min.x > self.spawn_region.max.x
            || self.spawn_region.min.y > self.spawn_region.max.y
        {
            return bad("spawn region must be a non-empty rectangle inside the map");
        }
        if self.waypoints.random.len() < 2 {
            return bad("random behavior needs at least two locations");
        }
        if (0..4).any(|s| self.waypoints.region(s).is_empty()) {
            return bad("every zig-zag region needs at least one point");
        }
        if let Some(p) = self.waypoints.all().find(|p| !map.contains(**p)) {
            return Err(Error::OutOfBounds(*p));
        }
        Ok(())
    }
}

/// A moving disc as seen by the avoidance rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub position: Point,
    pub velocity: Vec2,
    pub radius: f64,
    /// The disc takes half of every avoidance maneuver (reciprocal velocity
    /// obstacle) instead of holding its velocity.
    pub reciprocal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub position: Point,
    pub velocity: Vec2,
    pub target: Point,
    /// Zig-zag: index of the region of the current target. Random: index of
    /// the current destination (so it is not drawn twice in a row).
    pub behavior_state: usize,
    pub path: Vec<Point>,
    pub path_index: usize,
    pub radius: f64,
    pub preferred_speed: f64,
    pub targets_reached: usize,
}

impl Agent {
    pub fn disc(&self) -> Disc {
        Disc {
            position: self.position,
            velocity: self.velocity,
            radius: self.radius,
            reciprocal: false,
        }
    }

    pub fn next_waypoint(&self) -> Option<Point> {
        self.path.get(self.path_index).copied()
    }
}

/// Draws the agent's next destination and advances its behavior state.
///
/// Random: uniform over the random locations other than the current one.
/// Zig-zag: the state cycles upper-left, lower-left, upper-right,
/// lower-right and a point is drawn uniformly from the new region.
pub fn next_target<R: Rng>(agent: &mut Agent, behavior: Behavior, waypoints: &BehaviorWaypoints, rng: &mut R) -> Point {
    match behavior {
        Behavior::Random => {
            let n = waypoints.random.len();
            let idx = if agent.behavior_state < n {
                let k = rng.random_range(0..n - 1);
                if k >= agent.behavior_state {
                    k + 1
                } else {
                    k
                }
            } else {
                rng.random_range(0..n)
            };
            agent.behavior_state = idx;
            waypoints.random[idx]
        }
        Behavior::ZigZag => {
            let state = if agent.behavior_state < 4 {
                (agent.behavior_state + 1) % 4
            } else {
                UPPER_LEFT
            };
            agent.behavior_state = state;
            let region = waypoints.region(state);
            region[rng.random_range(0..region.len())]
        }
    }
}

/// Places `crowd_size` non-overlapping agents in the spawn region, clear of
/// walls, and draws their first targets. Paths are left empty.
pub fn init_scenario(scenario: &CrowdScenario, map: &EnvironmentMap, rng: &mut ChaCha8Rng) -> Result<Vec<Agent>> {
    scenario.validate(map)?;
    let r = scenario.agent.radius;
    let region = scenario.spawn_region;
    let mut agents: Vec<Agent> = Vec::with_capacity(scenario.crowd_size);
    let max_attempts = 2000 * scenario.crowd_size.max(1);
    let mut attempts = 0;
    while agents.len() < scenario.crowd_size {
        if attempts >= max_attempts {
            return Err(Error::InfeasiblePacking {
                requested: scenario.crowd_size,
                placed: agents.len(),
            });
        }
        attempts += 1;
        let p = Point::new(
            rng.random_range(region.min.x..=region.max.x),
            rng.random_range(region.min.y..=region.max.y),
        );
        if map.wall_distance(p) < r || agents.iter().any(|a| a.position.distance(p) < 2.0 * r) {
            continue;
        }
        agents.push(Agent {
            id: agents.len(),
            position: p,
            velocity: Vec2::ZERO,
            target: p,
            behavior_state: if scenario.behavior == Behavior::ZigZag { LOWER_RIGHT } else { NO_STATE },
            path: Vec::new(),
            path_index: 0,
            radius: r,
            preferred_speed: scenario.agent.preferred_speed,
            targets_reached: 0,
        });
    }
    for agent in &mut agents {
        agent.target = next_target(agent, scenario.behavior, &scenario.waypoints, rng);
    }
    Ok(agents)
}

/// Earliest time at which two discs with constant relative motion touch.
/// Overlapping discs collide immediately unless they are separating.
fn time_to_collision_disc(rel_pos: Vec2, rel_vel: Vec2, combined_radius: f64) -> f64 {
    // rel_pos: neighbor minus self; rel_vel: self minus neighbor
    let c = rel_pos.length_squared() - combined_radius * combined_radius;
    let b = rel_pos.dot(rel_vel);
    if c < 0.0 {
        return if b > 0.0 { 0.0 } else { f64::INFINITY };
    }
    let a = rel_vel.length_squared();
    if a == 0.0 || b <= 0.0 {
        return f64::INFINITY;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    (b - disc.sqrt()) / a
}

/// Earliest time at which a disc moving with `vel` touches the wall.
fn time_to_collision_wall(pos: Point, vel: Vec2, radius: f64, wall: &Segment) -> f64 {
    let closest = wall.closest_point(pos);
    let away = pos - closest;
    if away.length() < radius {
        return if vel.dot(away) < 0.0 { 0.0 } else { f64::INFINITY };
    }
    let speed = vel.length();
    if speed == 0.0 {
        return f64::INFINITY;
    }
    let dir = vel * (1.0 / speed);
    let mut hit = f64::INFINITY;
    for end in [wall.a, wall.b] {
        if let Some(s) = ray_circle_intersection(pos, dir, end, radius) {
            hit = hit.min(s);
        }
    }
    let e = (wall.b - wall.a).normalized();
    if e != Vec2::ZERO {
        let n = Vec2::new(-e.y, e.x) * radius;
        for side in [n, -n] {
            if let Some(s) = Segment::new(wall.a + side, wall.b + side).ray_intersection(pos, dir) {
                hit = hit.min(s);
            }
        }
    }
    hit / speed
}

/// Sampled velocity-obstacle choice.
///
/// Candidates are every speed fraction times the preferred speed along
/// `directions` headings evenly spaced from the preferred heading. A
/// candidate is rejected when it would touch a neighbor (moving at its
/// current velocity) or a wall before `horizon`. Returns the admissible
/// candidate nearest `preferred`, or zero when none is admissible.
///
/// In a packed group only zero survives the full horizon and everyone
/// freezes; in that case the horizon is halved (down to `min_horizon`) and
/// the search repeated.
pub fn avoid_velocity(agent: &Agent, neighbors: &[Disc], walls: &[Segment], preferred: Vec2, params: &AvoidanceParams) -> Vec2 {
    let base_heading = if preferred != Vec2::ZERO {
        preferred.angle()
    } else {
        agent.velocity.angle()
    };
    let admissible = |v: Vec2, horizon: f64| {
        neighbors.iter().all(|n| {
            let rel = if n.reciprocal {
                v * 2.0 - agent.velocity - n.velocity
            } else {
                v - n.velocity
            };
            time_to_collision_disc(n.position - agent.position, rel, agent.radius + n.radius) >= horizon
        }) && walls
            .iter()
            .all(|w| time_to_collision_wall(agent.position, v, agent.radius, w) >= horizon)
    };
    let mut candidates: Vec<(f64, Vec2)> = Vec::with_capacity(params.speed_fractions.len() * params.directions);
    for &frac in &params.speed_fractions {
        let speed = frac * agent.preferred_speed;
        let dirs = if speed == 0.0 { 1 } else { params.directions };
        for k in 0..dirs {
            let theta = base_heading + std::f64::consts::TAU * k as f64 / params.directions as f64;
            let v = Vec2::from_angle(theta) * speed;
            candidates.push(((v - preferred).length_squared(), v));
        }
    }
    // stable: equal errors keep generation order
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut horizon = params.horizon;
    loop {
        let v = candidates
            .iter()
            .map(|&(_, v)| v)
            .find(|&v| admissible(v, horizon))
            .unwrap_or(Vec2::ZERO);
        if v != Vec2::ZERO || preferred == Vec2::ZERO || horizon / 2.0 < params.min_horizon {
            return v;
        }
        horizon /= 2.0;
    }
}

/// Removes the wall-normal component of a displacement that would push a
/// disc into a wall; drops the move entirely if it still penetrates.
pub fn slide_along_walls(pos: Point, disp: Vec2, radius: f64, walls: &[Segment]) -> Vec2 {
    let mut d = disp;
    for _ in 0..4 {
        let next = pos + d;
        let mut changed = false;
        for w in walls {
            if w.distance_to_point(next) < radius {
                let n = (pos - w.closest_point(pos)).normalized();
                let into = d.dot(n);
                if into < 0.0 {
                    d = d - n * into;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let next = pos + d;
    let penetrates = walls.iter().any(|w| {
        let after = w.distance_to_point(next);
        after < radius && after < w.distance_to_point(pos)
    });
    if penetrates {
        Vec2::ZERO
    } else {
        d
    }
}

/// A running crowd: agents, the shared behavior RNG and the agents' planner.
#[derive(Debug, Clone)]
pub struct Crowd {
    scenario: CrowdScenario,
    agents: Vec<Agent>,
    rng: ChaCha8Rng,
    planner: Planner,
    ticks: u64,
}

impl Crowd {
    pub fn new(scenario: CrowdScenario, map: &EnvironmentMap, grid: &Grid) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let agents = init_scenario(&scenario, map, &mut rng)?;
        let mut crowd = Self {
            scenario,
            agents,
            rng,
            planner: Planner::new(map, grid),
            ticks: 0,
        };
        for i in 0..crowd.agents.len() {
            crowd.replan(i);
        }
        Ok(crowd)
    }

    /// A crowd of hand-placed agents. Their targets are kept and their
    /// paths are planned afresh; `scenario.crowd_size` is ignored.
    pub fn with_agents(scenario: CrowdScenario, agents: Vec<Agent>, map: &EnvironmentMap, grid: &Grid) -> Result<Self> {
        if let Some(a) = agents.iter().find(|a| !map.contains(a.position) || !map.contains(a.target)) {
            return Err(Error::OutOfBounds(if map.contains(a.position) { a.target } else { a.position }));
        }
        let mut crowd = Self {
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            scenario,
            agents,
            planner: Planner::new(map, grid),
            ticks: 0,
        };
        for i in 0..crowd.agents.len() {
            crowd.replan(i);
        }
        Ok(crowd)
    }

    pub fn scenario(&self) -> &CrowdScenario {
        &self.scenario
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn positions(&self) -> Vec<Point> {
        self.agents.iter().map(|a| a.position).collect()
    }

    fn replan(&mut self, i: usize) {
        let a = &mut self.agents[i];
        a.path = match self.planner.plan(PlannerMode::AStar, None, a.position, a.target) {
            Ok(plan) => plan.waypoints,
            // unreachable target: walk straight and let walls stop us
            Err(_) => vec![a.target],
        };
        a.path_index = 0;
    }

    /// Advances every agent by `dt` seconds. `robot` is avoided like any
    /// other person.
    pub fn step(&mut self, map: &EnvironmentMap, dt: f64, robot: Option<Disc>) {
        let tolerance = self.scenario.agent.target_tolerance;
        for i in 0..self.agents.len() {
            let a = &self.agents[i];
            if a.position.distance(a.target) <= tolerance {
                let behavior = self.scenario.behavior;
                let agent = &mut self.agents[i];
                agent.targets_reached += 1;
                agent.target = next_target(agent, behavior, &self.scenario.waypoints, &mut self.rng);
                self.replan(i);
            } else if a.next_waypoint().is_some_and(|w| !line_of_sight(a.position, w, map)) {
                self.replan(i);
            }
            self.advance_waypoint(i, map);
        }

        let params = &self.scenario.avoidance_params;
        let reach = self.scenario.agent.preferred_speed * params.horizon + 2.0 * self.scenario.agent.radius;
        let snapshot: Vec<Disc> = self.agents.iter().map(Agent::disc).collect();
        let mut velocities = Vec::with_capacity(self.agents.len());
        let mut nearby_walls: Vec<Vec<Segment>> = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            let preferred = preferred_velocity(a, dt);
            let walls: Vec<Segment> = map
                .obstacles()
                .iter()
                .filter(|w| w.distance_to_point(a.position) < reach)
                .copied()
                .collect();
            let v = match self.scenario.avoidance {
                Avoidance::None => preferred,
                Avoidance::VoSample => {
                    let mut neighbors: Vec<Disc> = snapshot
                        .iter()
                        .enumerate()
                        .filter(|&(j, d)| j != i && d.position.distance(a.position) <= params.neighbor_radius)
                        .map(|(_, d)| *d)
                        .collect();
                    if let Some(r) = robot {
                        if r.position.distance(a.position) <= params.neighbor_radius {
                            neighbors.push(r);
                        }
                    }
                    avoid_velocity(a, &neighbors, &walls, preferred, params)
                }
            };
            velocities.push(v);
            nearby_walls.push(walls);
        }
        let mut disps: Vec<Vec2> = self
            .agents
            .iter()
            .zip(velocities)
            .zip(&nearby_walls)
            .map(|((a, v), walls)| slide_along_walls(a.position, v * dt, a.radius, walls))
            .collect();
        if self.scenario.avoidance == Avoidance::VoSample {
            hold_overlapping_moves(&self.agents, &mut disps, robot);
        }
        for (a, disp) in self.agents.iter_mut().zip(disps) {
            a.position += disp;
            a.velocity = disp * (1.0 / dt);
        }
        self.ticks += 1;
    }

    fn advance_waypoint(&mut self, i: usize, map: &EnvironmentMap) {
        let a = &mut self.agents[i];
        for _ in 0..2 {
            if a.path_index + 1 >= a.path.len() {
                break;
            }
            let here = a.path[a.path_index];
            let next = a.path[a.path_index + 1];
            if a.position.distance(here) < 1.0 || map.segment_clearance(a.position, next) >= a.radius {
                a.path_index += 1;
            } else {
                break;
            }
        }
    }
}

/// Cancels moves that would leave two discs overlapping more than before
/// the step. Every agent involved in such a pair is held in place, and the
/// check repeats until no conflict remains, so the result does not depend
/// on agent order.
fn hold_overlapping_moves(agents: &[Agent], disps: &mut [Vec2], robot: Option<Disc>) {
    let n = agents.len();
    loop {
        let next: Vec<Point> = agents.iter().zip(disps.iter()).map(|(a, &d)| a.position + d).collect();
        let worsens = |p_old: Point, p_new: Point, q_old: Point, q_new: Point, reach: f64| {
            let d = p_new.distance(q_new);
            d < reach && d < p_old.distance(q_old)
        };
        let mut hold = vec![false; n];
        for i in 0..n {
            let (a, moved) = (&agents[i], disps[i] != Vec2::ZERO);
            if let Some(r) = robot {
                if moved && worsens(a.position, next[i], r.position, r.position, a.radius + r.radius) {
                    hold[i] = true;
                }
            }
            for j in i + 1..n {
                let b = &agents[j];
                if (moved || disps[j] != Vec2::ZERO)
                    && worsens(a.position, next[i], b.position, next[j], a.radius + b.radius)
                {
                    hold[i] |= moved;
                    hold[j] |= disps[j] != Vec2::ZERO;
                }
            }
        }
        if !hold.contains(&true) {
            return;
        }
        for (d, h) in disps.iter_mut().zip(hold) {
            if h {
                *d = Vec2::ZERO;
            }
        }
    }
}

fn preferred_velocity(a: &Agent, dt: f64) -> Vec2 {
    let Some(w) = a.next_waypoint() else {
        return Vec2::ZERO;
    };
    let offset = w - a.position;
    let dist = offset.length();
    if dist == 0.0 {
        return Vec2::ZERO;
    }
    let last = a.path_index + 1 >= a.path.len();
    let speed = if last { a.preferred_speed.min(dist / dt) } else { a.preferred_speed };
    offset * (speed / dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lone_agent(position: Point) -> Agent {
        Agent {
            id: 0,
            position,
            velocity: Vec2::ZERO,
            target: position,
            behavior_state: NO_STATE,
            path: Vec::new(),
            path_index: 0,
            radius: 0.3,
            preferred_speed: 1.4,
            targets_reached: 0,
        }
    }

    #[test]
    fn zigzag_state_order() {
        let wp = BehaviorWaypoints::for_extent(48.0, 36.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = lone_agent(Point::new(1.0, 1.0));
        a.behavior_state = UPPER_LEFT;
        let t = next_target(&mut a, Behavior::ZigZag, &wp, &mut rng);
        assert_eq!(a.behavior_state, LOWER_LEFT);
        assert!(wp.lower_left.contains(&t));
        for _ in 0..5 {
            next_target(&mut a, Behavior::ZigZag, &wp, &mut rng);
        }
        assert_eq!(a.behavior_state, UPPER_RIGHT);
    }

    #[test]
    fn random_never_repeats_current() {
        let wp = BehaviorWaypoints::for_extent(48.0, 36.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut a = lone_agent(Point::new(1.0, 1.0));
        let mut prev = NO_STATE;
        for _ in 0..200 {
            next_target(&mut a, Behavior::Random, &wp, &mut rng);
            assert_ne!(a.behavior_state, prev);
            prev = a.behavior_state;
        }
    }

    #[test]
    fn disc_ttc_head_on() {
        // 2 m apart, closing at 2 m/s, combined radius 0.6 -> 0.7 s
        let t = time_to_collision_disc(Vec2::new(2.0, 0.0), Vec2::new(2.0, 0.0), 0.6);
        assert!((t - 0.7).abs() < 1e-12);
        assert_eq!(time_to_collision_disc(Vec2::new(2.0, 0.0), Vec2::new(-1.0, 0.0), 0.6), f64::INFINITY);
        assert_eq!(time_to_collision_disc(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 0.6), 0.0);
        assert_eq!(time_to_collision_disc(Vec2::new(0.5, 0.0), Vec2::new(-1.0, 0.0), 0.6), f64::INFINITY);
    }

    #[test]
    fn wall_ttc_face_and_endpoint() {
        let wall = Segment::new(Point::new(2.0, -1.0), Point::new(2.0, 1.0));
        let t = time_to_collision_wall(Point::ZERO, Vec2::new(1.0, 0.0), 0.3, &wall);
        assert!((t - 1.7).abs() < 1e-12);
        // passes 0.4 beyond the endpoint: clears the end cap
        let t = time_to_collision_wall(Point::new(0.0, 1.4), Vec2::new(1.0, 0.0), 0.3, &wall);
        assert!(t.is_infinite());
        // 0.2 beyond: clips the end cap, twice as fast halves the time
        let t1 = time_to_collision_wall(Point::new(0.0, 1.2), Vec2::new(1.0, 0.0), 0.3, &wall);
        let t2 = time_to_collision_wall(Point::new(0.0, 1.2), Vec2::new(2.0, 0.0), 0.3, &wall);
        assert!((t1 - (2.0 - 0.05f64.sqrt())).abs() < 1e-12);
        assert!((t2 - t1 / 2.0).abs() < 1e-12);
        let t = time_to_collision_wall(Point::new(0.0, 1.1), Vec2::new(1.0, 0.0), 0.3, &wall);
        let expect = 2.0 - (0.09f64 - 0.01).sqrt();
        assert!((t - expect).abs() < 1e-12, "{t} vs {expect}");
    }

    #[test]
    fn free_agent_keeps_preferred_velocity() {
        let a = lone_agent(Point::new(5.0, 5.0));
        let pref = Vec2::new(1.0, 0.7);
        let v = avoid_velocity(&a, &[], &[], pref, &AvoidanceParams::default());
        // heading matches exactly, speed snaps to the full preferred speed
        assert!((v.angle() - pref.angle()).abs() < 1e-12);
    }

    #[test]
    fn surrounded_agent_stops() {
        let a = lone_agent(Point::new(5.0, 5.0));
        let ring: Vec<Disc> = (0..8)
            .map(|k| Disc {
                position: a.position + Vec2::from_angle(k as f64 * std::f64::consts::FRAC_PI_4) * 0.55,
                velocity: Vec2::ZERO,
                radius: 0.3,
                reciprocal: false,
            })
            .collect();
        let v = avoid_velocity(&a, &ring, &[], Vec2::new(1.4, 0.0), &AvoidanceParams::default());
        assert_eq!(v, Vec2::ZERO);
    }

    #[test]
    fn slide_removes_wall_normal_component() {
        let wall = Segment::new(Point::new(0.0, 2.0), Point::new(10.0, 2.0));
        let pos = Point::new(5.0, 1.7);
        let d = slide_along_walls(pos, Vec2::new(0.1, 0.1), 0.3, &[wall]);
        assert!(d.y.abs() < 1e-12);
        assert!((d.x - 0.1).abs() < 1e-12);
    }

    #[test]
    fn infeasible_packing_is_reported() {
        let map = EnvironmentMap::open(48.0, 36.0).unwrap();
        let mut s = CrowdScenario::for_map(&map, 50, Behavior::Random, Avoidance::VoSample, 1);
        s.spawn_region = Rect::new(Point::new(1.0, 1.0), Point::new(2.0, 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(init_scenario(&s, &map, &mut rng), Err(Error::InfeasiblePacking { .. })));
    }
}
