//! A* against CSA* on the office floor with a zig-zag crowd: runs both arms
//! over the same seeds and prints the comparison.
//!
//! cargo run --release --example compare_planners -- [people] [reps] [targets]

use std::time::Instant;

use crowdnav::crowd::{Avoidance, Behavior, CrowdScenario};
use crowdnav::experiment::{compare, run, ExperimentConfig, TargetSet};
use crowdnav::geometry::EnvironmentMap;
use crowdnav::planner::PlannerMode;

fn main() -> crowdnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let people: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(90);
    let reps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let n_targets: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);

    let map = EnvironmentMap::office();
    let scenario = CrowdScenario::for_map(&map, people, Behavior::ZigZag, Avoidance::VoSample, 0);
    let targets = TargetSet::bundled("A")?.truncated(n_targets);

    let mut arms = Vec::new();
    for mode in [PlannerMode::AStar, PlannerMode::CsAStar] {
        let mut config = ExperimentConfig::office(scenario.clone(), targets.clone(), mode);
        config.repetitions = reps;
        let started = Instant::now();
        let runs = run(&config)?;
        println!("{mode} ({:.1} s wall clock)", started.elapsed().as_secs_f64());
        for (rep, m) in runs.iter().enumerate() {
            println!(
                "  rep {rep}: time {:8.1} s  distance {:7.1} m  clearance {:5.2} m  risky {:5}  reached {:2}/{}",
                m.total_time, m.total_distance, m.clearance, m.risky_actions, m.targets_reached, targets.targets.len()
            );
        }
        arms.push(runs);
    }

    let report = compare(&arms[0], &arms[1])?;
    println!("\nmetric          A*       CSA*    change    t        p        d");
    for (name, m) in report.metrics() {
        println!(
            "{name:<13} {:8.2} {:8.2} {:>+7.1}% {:>8} {:>8} {:>7}",
            m.mean_a,
            m.mean_b,
            m.percent_change.unwrap_or(f64::NAN),
            m.welch.map_or("-".into(), |w| format!("{:.2}", w.t)),
            m.significance.as_str(),
            m.cohens_d.map_or("-".into(), |d| format!("{d:.2}")),
        );
    }
    Ok(())
}
