//! Regenerates the office target sets A and B and prints them as JSON,
//! along with their zero-crowd tour lengths.
//!
//! cargo run --example target_sets > crates/core/assets/target_sets.json

use crowdnav::experiment::targets::{OFFICE_TARGET_SEED, TARGETS_PER_SET};
use crowdnav::experiment::{generate_target_sets, tour_length, OFFICE_START};
use crowdnav::geometry::{EnvironmentMap, Grid};
use crowdnav::planner::Planner;

fn main() -> crowdnav::Result<()> {
    let map = EnvironmentMap::office();
    let grid = Grid::for_map(&map, 3.0)?;
    let (a, b) = generate_target_sets(&map, &grid, OFFICE_START, TARGETS_PER_SET, OFFICE_TARGET_SEED)?;
    let planner = Planner::new(&map, &grid);
    for set in [&a, &b] {
        eprintln!("set {}: tour {:.1} m", set.name, tour_length(&planner, OFFICE_START, &set.targets)?);
    }
    println!("{}", serde_json::to_string_pretty(&[a, b])?);
    Ok(())
}
