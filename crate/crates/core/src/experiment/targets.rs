//! Ordered target lists for the robot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assets::TARGET_SETS_JSON;
use crate::error::{Error, Result};
use crate::geometry::{EnvironmentMap, Grid, Point};
use crate::planner::{Planner, PlannerMode};

/// Seed the bundled office target sets were generated with.
pub const OFFICE_TARGET_SEED: u64 = 2019;
pub const TARGETS_PER_SET: usize = 15;
/// Generated targets keep this distance from walls.
pub const TARGET_WALL_CLEARANCE: f64 = 1.0;
/// Consecutive generated targets are at least this far apart.
pub const TARGET_SEPARATION: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub name: String,
    pub targets: Vec<Point>,
}

impl TargetSet {
    pub fn new(name: impl Into<String>, targets: Vec<Point>) -> Self {
        Self {
            name: name.into(),
            targets,
        }
    }

    /// Bundled office target set `"A"` (easier) or `"B"` (harder).
    pub fn bundled(name: &str) -> Result<Self> {
        let sets: Vec<TargetSet> = serde_json::from_str(TARGET_SETS_JSON)?;
        sets.into_iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidParameter(format!("no bundled target set {name:?}")))
    }

    /// The first `n` targets.
    pub fn truncated(&self, n: usize) -> Self {
        Self::new(self.name.clone(), self.targets.iter().take(n).copied().collect())
    }
}

/// Sum of zero-crowd A* plan costs from `start` through every target.
pub fn tour_length(planner: &Planner, start: Point, targets: &[Point]) -> Result<f64> {
    let mut from = start;
    let mut total = 0.0;
    for &t in targets {
        total += planner.plan(PlannerMode::AStar, None, from, t)?.total_cost;
        from = t;
    }
    Ok(total)
}

fn draw_targets(map: &EnvironmentMap, planner: &Planner, start: Point, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(n);
    let margin = TARGET_WALL_CLEARANCE;
    while out.len() < n {
        let x = (rng.random_range(margin..map.width() - margin) * 10.0).round() / 10.0;
        let y = (rng.random_range(margin..map.height() - margin) * 10.0).round() / 10.0;
        let p = Point::new(x, y);
        let prev = out.last().copied().unwrap_or(start);
        if map.wall_distance(p) < margin
            || p.distance(prev) < TARGET_SEPARATION
            || planner.plan(PlannerMode::AStar, None, start, p).is_err()
        {
            continue;
        }
        out.push(p);
    }
    out
}

/// Draws two target lists from one seeded stream. The one with the
/// shorter zero-crowd tour is named `A`, the other `B`.
pub fn generate_target_sets(map: &EnvironmentMap, grid: &Grid, start: Point, n: usize, seed: u64) -> Result<(TargetSet, TargetSet)> {
    let planner = Planner::new(map, grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = draw_targets(map, &planner, start, n, &mut rng);
    let second = draw_targets(map, &planner, start, n, &mut rng);
    let (easy, hard) = if tour_length(&planner, start, &first)? <= tour_length(&planner, start, &second)? {
        (first, second)
    } else {
        (second, first)
    };
    Ok((TargetSet::new("A", easy), TargetSet::new("B", hard)))
}
