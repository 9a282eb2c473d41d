//! One laser scan and one people scan from the robot's start pose with a
//! small crowd in the corner room.
//!
//! cargo run --example lidar_scan -- [people]

use crowdnav::controller::{sense, ControllerConfig};
use crowdnav::crowd::{Avoidance, Behavior, Crowd, CrowdScenario, Disc};
use crowdnav::experiment::OFFICE_START;
use crowdnav::geometry::{EnvironmentMap, Grid, Point, Pose};

fn main() -> crowdnav::Result<()> {
    let people: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let map = EnvironmentMap::office();
    let grid = Grid::for_map(&map, 3.0)?;
    let config = ControllerConfig::default();
    let crowd = Crowd::new(
        CrowdScenario::for_map(&map, people, Behavior::ZigZag, Avoidance::VoSample, 1),
        &map,
        &grid,
    )?;
    let discs: Vec<Disc> = crowd.agents().iter().map(|a| a.disc()).collect();

    // Facing the lower-left room, where the crowd spawns.
    let pose = Pose::new(OFFICE_START, (Point::new(6.0, 6.0) - OFFICE_START).angle());
    let snap = sense(&pose, &map, &discs, &config, 0);

    println!("{} beams over {:.0} degrees", snap.laser.len(), config.fov_deg);
    let per_bin = snap.laser.len() / 11;
    for (i, bin) in snap.laser.chunks(per_bin).enumerate() {
        let nearest = bin.iter().copied().fold(f64::INFINITY, f64::min);
        let offset = -config.fov_deg / 2.0 + (i * per_bin) as f64 * config.fov_deg / snap.laser.len() as f64;
        let bar = "#".repeat((nearest * 2.0).round() as usize);
        println!("{offset:>+7.1} deg  {nearest:5.2} m  {bar}");
    }
    println!(
        "\n{} of {} people in view (range {} m, line of sight required):",
        snap.local_crowd.people.len(),
        people,
        config.sensor_range
    );
    for (p, v) in snap.local_crowd.people.iter().zip(&snap.motion) {
        println!("  at ({:.1}, {:.1})  {:.1} m away, moving {:.2} m/s", p.x, p.y, p.distance(pose.position), v.length());
    }
    Ok(())
}
