//! Simulates a zig-zag crowd on the office floor and reports how far the
//! people got through their corner-to-corner circuit.
//!
//! cargo run --release --example zigzag_crowd -- [people] [seconds] [zigzag|random]

use crowdnav::crowd::{Avoidance, Behavior, Crowd, CrowdScenario};
use crowdnav::geometry::{EnvironmentMap, Grid};

fn main() -> crowdnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let people: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(90);
    let seconds: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(300.0);
    let behavior: Behavior = args.next().map(|s| s.parse()).transpose()?.unwrap_or(Behavior::ZigZag);

    let map = EnvironmentMap::office();
    let grid = Grid::for_map(&map, 3.0)?;
    let scenario = CrowdScenario::for_map(&map, people, behavior, Avoidance::VoSample, 7);
    let mut crowd = Crowd::new(scenario, &map, &grid)?;

    let dt = 0.1;
    let steps = (seconds / dt).round() as usize;
    for step in 1..=steps {
        crowd.step(&map, dt, None);
        if step % 600 == 0 {
            let reached: usize = crowd.agents().iter().map(|a| a.targets_reached).sum();
            let moving = crowd.agents().iter().filter(|a| a.velocity.length() > 0.1).count();
            println!("t={:>6.1}s  targets reached={reached:>5}  moving={moving}/{people}", step as f64 * dt);
        }
    }
    let laps = crowd.agents().iter().filter(|a| a.targets_reached >= 4).count();
    println!("{laps}/{people} people completed a full circuit");
    Ok(())
}
