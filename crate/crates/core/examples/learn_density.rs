//! Learns a crowd-density map while the robot watches from a few fixed
//! vantage points, then prints the normalized heatmap (top of the map
//! first) and optionally saves the checkpoint.
//!
//! cargo run --release --example learn_density -- [people] [seconds] [alpha] [out.json]

use crowdnav::controller::{sense, ControllerConfig};
use crowdnav::crowd::{Avoidance, Behavior, Crowd, CrowdScenario, Disc};
use crowdnav::density::{visibility_mask, DensityMap};
use crowdnav::geometry::{EnvironmentMap, Grid, Point, Pose};

fn main() -> crowdnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let people: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(90);
    let seconds: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(300.0);
    let alpha: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let out = args.next();

    let map = EnvironmentMap::office();
    let grid = Grid::for_map(&map, 3.0)?;
    let config = ControllerConfig::default();
    let mut crowd = Crowd::new(
        CrowdScenario::for_map(&map, people, Behavior::ZigZag, Avoidance::VoSample, 3),
        &map,
        &grid,
    )?;
    let mut density = DensityMap::new(grid, alpha)?;

    let vantage = [
        Pose::new(Point::new(24.0, 18.0), 0.0),
        Pose::new(Point::new(24.0, 18.0), std::f64::consts::PI),
        Pose::new(Point::new(28.5, 10.5), std::f64::consts::FRAC_PI_2),
    ];
    let dt = 0.1;
    let steps = (seconds / dt).round() as u64;
    for step in 0..steps {
        crowd.step(&map, dt, None);
        if step % 10 != 0 {
            continue;
        }
        // One observation per simulated second, cycling the vantage points.
        let cycle = step / 10;
        let pose = vantage[cycle as usize % vantage.len()];
        let discs: Vec<Disc> = crowd.agents().iter().map(|a| a.disc()).collect();
        let snap = sense(&pose, &map, &discs, &config, cycle);
        let visible = visibility_mask(&pose, &map, &grid, config.sensor_range, config.fov());
        density.update(&snap.local_crowd, &visible)?;
    }

    println!("{} updates, alpha {alpha}", density.updates());
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    let norm = density.normalized();
    for row in (0..grid.rows()).rev() {
        let line: String = norm[row * grid.cols()..(row + 1) * grid.cols()]
            .iter()
            .map(|&v| shades[((v * 9.0).round() as usize).min(9)])
            .flat_map(|c| [c, c])
            .collect();
        println!("|{line}|");
    }
    if let Some(path) = out {
        density.save(&path)?;
        println!("saved {path}");
    }
    Ok(())
}
