//! A reduced factorial sweep (two crowd sizes, zig-zag only, six targets)
//! written as runs.csv and summary.csv.
//!
//! cargo run --release --example small_sweep -- [out dir]

use crowdnav::crowd::Behavior;
use crowdnav::experiment::{run_sweep, SweepSpec};

fn main() -> crowdnav::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "sweep_out".into());
    let spec = SweepSpec {
        crowd_sizes: vec![30, 90],
        behaviors: vec![Behavior::ZigZag],
        target_sets: vec!["A".into()],
        repetitions: 2,
        targets_limit: Some(6),
        ..SweepSpec::default()
    };
    let configs = spec.expand()?;
    println!("{} configurations", configs.len());
    let report = run_sweep(&configs);
    for s in &report.summary {
        println!(
            "P={:<3} {:<9} time {:7.1} -> {:7.1} ({:+.1}%)  risky {:6.1} -> {:6.1}",
            s.crowd_size, s.avoidance, s.time_astar, s.time_csastar, s.time_pct.unwrap_or(f64::NAN), s.risky_astar, s.risky_csastar
        );
    }
    report.save(&out)?;
    println!("wrote {out}/runs.csv and {out}/summary.csv");
    Ok(())
}
