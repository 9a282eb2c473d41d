//! Plans the same trip with A* and with CSA* after a crowd has been seen
//! filling the central hall, and prints both routes.
//!
//! cargo run --example crowd_sensitive_plan

use crowdnav::density::{CellMask, DensityMap, LocalCrowdObservation};
use crowdnav::geometry::{EnvironmentMap, Grid, Point, Pose};
use crowdnav::planner::{Plan, Planner, PlannerMode};

fn main() -> crowdnav::Result<()> {
    let map = EnvironmentMap::office();
    let grid = Grid::for_map(&map, 3.0)?;
    let planner = Planner::new(&map, &grid);

    // Two people in every hall cell, seen once with the whole floor in view.
    let hall: Vec<Point> = (0..16)
        .flat_map(|c| {
            let x = 1.5 + 3.0 * c as f64;
            [Point::new(x, 16.0), Point::new(x, 19.0)]
        })
        .flat_map(|p| [p, p + crowdnav::geometry::Vec2::new(0.5, 0.5)])
        .collect();
    let obs = LocalCrowdObservation {
        cycle: 0,
        people: hall,
        robot_pose: Pose::new(Point::new(24.0, 18.0), 0.0),
    };
    let mut density = DensityMap::new(grid, 1.0)?;
    density.update(&obs, &CellMask::new(grid.rows(), grid.cols(), true))?;

    let start = Point::new(4.5, 10.5);
    let target = Point::new(43.5, 25.5);
    let plain = planner.plan(PlannerMode::AStar, None, start, target)?;
    let aware = planner.plan(PlannerMode::CsAStar, Some(&density), start, target)?;
    show("A*", &plain, &planner);
    show("CSA*", &aware, &planner);
    Ok(())
}

fn show(name: &str, plan: &Plan, planner: &Planner) {
    let length = planner.graph().path_cost(&plan.cells.iter().map(|&c| planner.grid().id(c)).collect::<Vec<_>>());
    println!(
        "{name:<5} {} waypoints, length {:.1} m, weighted cost {:.1}",
        plan.len(),
        length.unwrap_or(f64::NAN),
        plan.total_cost
    );
    let cells: Vec<String> = plan.cells.iter().map(|c| c.to_string()).collect();
    println!("      {}", cells.join(" "));
}
