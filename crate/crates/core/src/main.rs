use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crowdnav::crowd::{Avoidance, Behavior, CrowdScenario};
use crowdnav::density::DensityMap;
use crowdnav::experiment::{
    replay, run_on_map, run_sweep, sweep, ExperimentConfig, RunCapture, SweepReport, SweepRow, SweepSpec, TargetSet,
    TrajectoryLog,
};
use crowdnav::geometry::{EnvironmentMap, Grid};
use crowdnav::planner::PlannerMode;

#[derive(Parser)]
#[command(name = "crowdnav", version, about = "Crowd-density learning and crowd-sensitive planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration (both planners when neither the file nor
    /// --planner picks one).
    Run {
        /// Experiment config (JSON); office defaults with target set A when omitted.
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
        /// Bundled target set for the default config.
        #[arg(long, default_value = "A")]
        target_set: String,
        /// Keep only the first N targets.
        #[arg(long)]
        targets: Option<usize>,
    },
    /// Run a factorial grid of configurations.
    Sweep {
        /// Sweep spec (JSON); the full 48-configuration grid when omitted.
        spec: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        targets: Option<usize>,
    },
    /// Recompute distance, clearance and risky actions from a trajectory log.
    Replay {
        log: PathBuf,
        /// Map file; the bundled office map when omitted.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        risky_threshold: f64,
    },
    /// Write a density checkpoint as a CSV heatmap.
    DensityExport {
        density: PathBuf,
        /// Raw densities instead of min-max normalized ones.
        #[arg(long)]
        raw: bool,
        /// Output file or directory; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Flags {
    /// astar or csastar; comma-separated for sweeps.
    #[arg(long, value_delimiter = ',')]
    planner: Vec<PlannerMode>,
    /// Crowd size; comma-separated for sweeps.
    #[arg(long, value_delimiter = ',')]
    crowd: Vec<usize>,
    /// random or zigzag; comma-separated for sweeps.
    #[arg(long, value_delimiter = ',')]
    behavior: Vec<Behavior>,
    /// vo_sample or none; comma-separated for sweeps.
    #[arg(long, value_delimiter = ',')]
    avoidance: Vec<Avoidance>,
    /// Seed of the first repetition.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Output directory for runs.csv, summary.csv and per-run logs.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Ok(false) when some run failed but outputs were still written.
fn dispatch(command: Command) -> crowdnav::Result<bool> {
    match command {
        Command::Run {
            config,
            flags,
            target_set,
            targets,
        } => run_command(config, flags, &target_set, targets),
        Command::Sweep { spec, flags, targets } => sweep_command(spec, flags, targets),
        Command::Replay {
            log,
            map,
            risky_threshold,
        } => {
            let map = match map {
                Some(p) => EnvironmentMap::load(p)?,
                None => EnvironmentMap::office(),
            };
            let m = replay(&TrajectoryLog::load(log)?, &map, risky_threshold)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
            Ok(true)
        }
        Command::DensityExport { density, raw, out } => {
            let csv = DensityMap::load(&density)?.heatmap_csv(!raw);
            match out {
                Some(p) => {
                    let p = if p.is_dir() { p.join("density.csv") } else { p };
                    std::fs::write(&p, csv)?;
                    eprintln!("wrote {}", p.display());
                }
                None => print!("{csv}"),
            }
            Ok(true)
        }
    }
}

fn run_command(path: Option<PathBuf>, flags: Flags, set: &str, targets: Option<usize>) -> crowdnav::Result<bool> {
    let from_file = path.is_some();
    let mut base = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let map = EnvironmentMap::office();
            let scenario = CrowdScenario::for_map(&map, 30, Behavior::ZigZag, Avoidance::VoSample, 0);
            ExperimentConfig::office(scenario, TargetSet::bundled(set)?, PlannerMode::CsAStar)
        }
    };
    if let Some(n) = targets {
        base.target_set = base.target_set.truncated(n);
    }
    if let Some(&p) = flags.crowd.first() {
        base.scenario.crowd_size = p;
    }
    if let Some(&b) = flags.behavior.first() {
        base.scenario.behavior = b;
    }
    if let Some(&a) = flags.avoidance.first() {
        base.scenario.avoidance = a;
    }
    if let Some(s) = flags.seed {
        base.base_seed = s;
    }
    if let Some(r) = flags.reps {
        base.repetitions = r;
    }
    if let Some(a) = flags.alpha {
        base.alpha = a;
    }
    let modes = match (flags.planner.is_empty(), from_file) {
        (false, _) => flags.planner.clone(),
        (true, true) => vec![base.planner_mode],
        (true, false) => vec![PlannerMode::AStar, PlannerMode::CsAStar],
    };

    let out = &flags.out;
    std::fs::create_dir_all(out)?;
    let map = base.load_map()?;
    let grid = Grid::for_map(&map, base.cell_size)?;
    let mut rows = Vec::new();
    for (index, &mode) in modes.iter().enumerate() {
        let mut config = base.clone();
        config.planner_mode = mode;
        let valid = config.validate(&map, &grid);
        for rep in 0..config.repetitions {
            let result = match &valid {
                Err(e) => Err(crowdnav::Error::InvalidParameter(e.to_string())),
                Ok(()) => run_captured(&config, rep, &map, &grid, out),
            };
            let row = SweepRow::new(index, &config, rep, result);
            print_row(&row);
            rows.push(row);
        }
    }
    let summary = sweep::summarize(&rows);
    finish(SweepReport { rows, summary }, out)
}

/// Runs one repetition and writes its trajectory (and learned density for
/// CSA*) next to runs.csv.
fn run_captured(
    config: &ExperimentConfig,
    rep: usize,
    map: &EnvironmentMap,
    grid: &Grid,
    out: &Path,
) -> crowdnav::Result<crowdnav::experiment::RunMetrics> {
    let mut capture = RunCapture {
        trajectory: Some(TrajectoryLog::default()),
        ..RunCapture::default()
    };
    let metrics = run_on_map(config, rep, map, grid, &mut capture)?;
    let stem = format!("{}_seed{}", config.planner_mode, config.seed(rep));
    if let Some(log) = &capture.trajectory {
        log.write_csv(std::fs::File::create(out.join(format!("trajectory_{stem}.csv")))?)?;
    }
    if let Some(d) = &capture.density {
        d.save(out.join(format!("density_{stem}.json")))?;
    }
    Ok(metrics)
}

fn sweep_command(path: Option<PathBuf>, flags: Flags, targets: Option<usize>) -> crowdnav::Result<bool> {
    let mut spec = match path {
        Some(p) => SweepSpec::load(p)?,
        None => SweepSpec::default(),
    };
    if !flags.planner.is_empty() {
        spec.planners = flags.planner.clone();
    }
    if !flags.crowd.is_empty() {
        spec.crowd_sizes = flags.crowd.clone();
    }
    if !flags.behavior.is_empty() {
        spec.behaviors = flags.behavior.clone();
    }
    if !flags.avoidance.is_empty() {
        spec.avoidances = flags.avoidance.clone();
    }
    if let Some(s) = flags.seed {
        spec.base_seed = s;
    }
    if let Some(r) = flags.reps {
        spec.repetitions = r;
    }
    if let Some(a) = flags.alpha {
        spec.alpha = a;
    }
    if targets.is_some() {
        spec.targets_limit = targets;
    }
    let configs = spec.expand()?;
    eprintln!(
        "{} configurations, {} runs",
        configs.len(),
        configs.iter().map(|c| c.repetitions).sum::<usize>()
    );
    let report = run_sweep(&configs);
    for row in &report.rows {
        print_row(row);
    }
    finish(report, &flags.out)
}

fn print_row(r: &SweepRow) {
    let head = format!(
        "{:>3} P={:<3} {:<6} {:<9} set {} {:<7} seed {:<4}",
        r.config, r.crowd_size, r.behavior, r.avoidance, r.target_set, r.planner, r.seed
    );
    match r.metrics() {
        Some(m) => println!(
            "{head} time {:8.1} dist {:7.1} clear {:5.2} risky {:5} reached {}{}",
            m.total_time,
            m.total_distance,
            m.clearance,
            m.risky_actions,
            m.targets_reached,
            if m.completed { "" } else { " (timed out)" }
        ),
        None => println!("{head} error: {}", r.error),
    }
}

fn finish(report: SweepReport, out: &Path) -> crowdnav::Result<bool> {
    report.save(out)?;
    for s in &report.summary {
        println!(
            "P={} {} {} set {}: time {:+.1}% ({}), risky {:+.1}% ({})",
            s.crowd_size,
            s.behavior,
            s.avoidance,
            s.target_set,
            s.time_pct.unwrap_or(f64::NAN),
            s.time_p,
            s.risky_pct.unwrap_or(f64::NAN),
            s.risky_p
        );
    }
    eprintln!("wrote {}", out.display());
    Ok(!report.any_errors())
}
