//! Records a run's trajectory, writes it to CSV, reads it back and
//! recomputes the metrics offline.
//!
//! cargo run --release --example replay_log -- [people]

use crowdnav::crowd::{Avoidance, Behavior, CrowdScenario};
use crowdnav::experiment::{replay, run_once, ExperimentConfig, RunCapture, TargetSet, TrajectoryLog};
use crowdnav::geometry::EnvironmentMap;
use crowdnav::planner::PlannerMode;

fn main() -> crowdnav::Result<()> {
    let people: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(90);
    let map = EnvironmentMap::office();
    let scenario = CrowdScenario::for_map(&map, people, Behavior::ZigZag, Avoidance::VoSample, 0);
    let config = ExperimentConfig::office(scenario, TargetSet::bundled("A")?.truncated(6), PlannerMode::AStar);

    let mut capture = RunCapture {
        trajectory: Some(TrajectoryLog::default()),
        ..RunCapture::default()
    };
    let online = run_once(&config, 0, &mut capture)?;
    let path = std::env::temp_dir().join("crowdnav_trajectory.csv");
    capture.trajectory.expect("requested").write_csv(std::fs::File::create(&path)?)?;

    let offline = replay(&TrajectoryLog::load(&path)?, &map, config.risky_threshold)?;
    println!("log: {}", path.display());
    println!("            online      replayed");
    println!("cycles    {:>8}    {:>10}", online.cycles, offline.cycles);
    println!("distance  {:>8.3}    {:>10.3}", online.total_distance, offline.total_distance);
    println!("clearance {:>8.4}    {:>10.4}", online.clearance, offline.clearance);
    println!("risky     {:>8}    {:>10}", online.risky_actions, offline.risky_actions);
    Ok(())
}
