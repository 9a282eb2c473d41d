//! The robot drives from its start to one target through a crowd, printing
//! the tier and action of every decision.
//!
//! cargo run --release --example single_target -- [people] [astar|csastar] [target index]

use crowdnav::crowd::{Avoidance, Behavior, CrowdScenario};
use crowdnav::experiment::{run_once, ExperimentConfig, RunCapture, TargetSet};
use crowdnav::geometry::EnvironmentMap;
use crowdnav::planner::PlannerMode;

fn main() -> crowdnav::Result<()> {
    let mut args = std::env::args().skip(1);
    let people: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let mode: PlannerMode = args.next().map(|s| s.parse()).transpose()?.unwrap_or(PlannerMode::CsAStar);
    let index: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let map = EnvironmentMap::office();
    let set = TargetSet::bundled("A")?;
    let target = set.targets[index.min(set.targets.len() - 1)];
    let scenario = CrowdScenario::for_map(&map, people, Behavior::ZigZag, Avoidance::VoSample, 0);
    let config = ExperimentConfig::office(scenario, TargetSet::new("one", vec![target]), mode);

    let mut capture = RunCapture::everything();
    let m = run_once(&config, 0, &mut capture)?;
    for d in capture.decisions.as_deref().unwrap_or_default() {
        println!(
            "{:>4}  ({:5.1}, {:5.1}) {:>+5.0} deg  {:<16} {:<14} survivors {:>2}  plan {}",
            d.cycle,
            d.x,
            d.y,
            d.heading.to_degrees(),
            format!("{:?}", d.tier),
            d.action,
            d.surviving,
            d.plan_length
        );
    }
    println!(
        "\ntarget {target}: {} in {:.1} s, {:.1} m driven, clearance {:.2} m, {} risky",
        if m.completed { "reached" } else { "not reached" },
        m.total_time,
        m.total_distance,
        m.clearance,
        m.risky_actions
    );
    Ok(())
}
