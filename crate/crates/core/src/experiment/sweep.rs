//! Factorial sweeps over crowd scenarios, target sets and planners.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_on_map, ExperimentConfig, MetricComparison, RunCapture, RunMetrics, TargetSet};
use crate::controller::ControllerConfig;
use crate::crowd::{Avoidance, Behavior, CrowdScenario};
use crate::error::Result;
use crate::geometry::{EnvironmentMap, Grid};
use crate::planner::PlannerMode;

fn d_crowds() -> Vec<usize> {
    vec![30, 60, 90]
}
fn d_behaviors() -> Vec<Behavior> {
    vec![Behavior::Random, Behavior::ZigZag]
}
fn d_avoidances() -> Vec<Avoidance> {
    vec![Avoidance::VoSample, Avoidance::None]
}
fn d_sets() -> Vec<String> {
    vec!["A".into(), "B".into()]
}
fn d_planners() -> Vec<PlannerMode> {
    vec![PlannerMode::AStar, PlannerMode::CsAStar]
}
fn d_reps() -> usize {
    5
}
fn d_alpha() -> f64 {
    1.0
}
fn d_eps() -> f64 {
    0.5
}
fn d_max_time() -> f64 {
    3000.0
}

/// Full factorial grid. Defaults give 3 crowd sizes x 2 behaviors x 2
/// avoidance modes x 2 target sets x 2 planners = 48 configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(default = "d_crowds")]
    pub crowd_sizes: Vec<usize>,
    #[serde(default = "d_behaviors")]
    pub behaviors: Vec<Behavior>,
    #[serde(default = "d_avoidances")]
    pub avoidances: Vec<Avoidance>,
    /// Bundled target set names.
    #[serde(default = "d_sets")]
    pub target_sets: Vec<String>,
    #[serde(default = "d_planners")]
    pub planners: Vec<PlannerMode>,
    #[serde(default = "d_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_eps")]
    pub epsilon_reach: f64,
    #[serde(default = "d_max_time")]
    pub max_sim_time: f64,
    /// Use only the first n targets of each set.
    #[serde(default)]
    pub targets_limit: Option<usize>,
    #[serde(default)]
    pub controller: ControllerConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

impl SweepSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Configurations in crowd, behavior, avoidance, target set, planner
    /// order.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let map = EnvironmentMap::office();
        let mut out = Vec::new();
        for &p in &self.crowd_sizes {
            for &behavior in &self.behaviors {
                for &avoidance in &self.avoidances {
                    for set in &self.target_sets {
                        let mut targets = TargetSet::bundled(set)?;
                        if let Some(n) = self.targets_limit {
                            targets = targets.truncated(n);
                        }
                        for &mode in &self.planners {
                            let scenario = CrowdScenario::for_map(&map, p, behavior, avoidance, self.base_seed);
                            let mut c = ExperimentConfig::office(scenario, targets.clone(), mode);
                            c.alpha = self.alpha;
                            c.epsilon_reach = self.epsilon_reach;
                            c.max_sim_time = self.max_sim_time;
                            c.repetitions = self.repetitions;
                            c.base_seed = self.base_seed;
                            c.controller = self.controller.clone();
                            out.push(c);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One line of runs.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config: usize,
    pub crowd_size: usize,
    pub behavior: Behavior,
    pub avoidance: Avoidance,
    pub target_set: String,
    pub planner: PlannerMode,
    pub alpha: f64,
    pub rep: usize,
    pub seed: u64,
    pub total_time: Option<f64>,
    pub total_distance: Option<f64>,
    pub clearance: Option<f64>,
    pub risky_actions: Option<u64>,
    pub targets_reached: Option<usize>,
    pub completed: Option<bool>,
    pub cycles: Option<u64>,
    pub error: String,
}

impl SweepRow {
    pub fn new(index: usize, c: &ExperimentConfig, rep: usize, result: Result<RunMetrics>) -> Self {
        let (m, error) = match result {
            Ok(m) => (Some(m), String::new()),
            Err(e) => (None, e.to_string()),
        };
        Self {
            config: index,
            crowd_size: c.scenario.crowd_size,
            behavior: c.scenario.behavior,
            avoidance: c.scenario.avoidance,
            target_set: c.target_set.name.clone(),
            planner: c.planner_mode,
            alpha: c.alpha,
            rep,
            seed: c.seed(rep),
            total_time: m.map(|m| m.total_time),
            total_distance: m.map(|m| m.total_distance),
            clearance: m.map(|m| m.clearance),
            risky_actions: m.map(|m| m.risky_actions),
            targets_reached: m.map(|m| m.targets_reached),
            completed: m.map(|m| m.completed),
            cycles: m.map(|m| m.cycles),
            error,
        }
    }

    pub fn metrics(&self) -> Option<RunMetrics> {
        Some(RunMetrics {
            total_time: self.total_time?,
            total_distance: self.total_distance?,
            clearance: self.clearance?,
            risky_actions: self.risky_actions?,
            targets_reached: self.targets_reached?,
            completed: self.completed?,
            cycles: self.cycles?,
        })
    }

    fn scenario_key(&self) -> (usize, Behavior, Avoidance, &str, u64) {
        (self.crowd_size, self.behavior, self.avoidance, &self.target_set, self.alpha.to_bits())
    }
}

/// One line of summary.csv: A* against CSA* on one scenario and target set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub crowd_size: usize,
    pub behavior: Behavior,
    pub avoidance: Avoidance,
    pub target_set: String,
    pub alpha: f64,
    pub runs_astar: usize,
    pub runs_csastar: usize,
    pub time_astar: f64,
    pub time_csastar: f64,
    pub time_pct: Option<f64>,
    pub time_t: Option<f64>,
    pub time_p: String,
    pub time_d: Option<f64>,
    pub distance_astar: f64,
    pub distance_csastar: f64,
    pub distance_pct: Option<f64>,
    pub distance_t: Option<f64>,
    pub distance_p: String,
    pub distance_d: Option<f64>,
    pub clearance_astar: f64,
    pub clearance_csastar: f64,
    pub clearance_pct: Option<f64>,
    pub clearance_t: Option<f64>,
    pub clearance_p: String,
    pub clearance_d: Option<f64>,
    pub risky_astar: f64,
    pub risky_csastar: f64,
    pub risky_pct: Option<f64>,
    pub risky_t: Option<f64>,
    pub risky_p: String,
    pub risky_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
}

impl SweepReport {
    pub fn any_errors(&self) -> bool {
        self.rows.iter().any(|r| !r.error.is_empty())
    }

    pub fn write_runs_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows)
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.summary)
    }

    /// Writes runs.csv and summary.csv into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_runs_csv(std::fs::File::create(dir.join("runs.csv"))?)?;
        self.write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?)
    }
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every repetition of every configuration (in parallel) and pairs
/// A* with CSA* configurations that share a scenario and target set.
/// Failed runs are recorded in their row and do not stop the sweep.
pub fn run_sweep(configs: &[ExperimentConfig]) -> SweepReport {
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.repetitions).map(move |r| (i, r)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, rep)| {
            let c = &configs[i];
            let result = c.load_map().and_then(|map| {
                let grid = Grid::for_map(&map, c.cell_size)?;
                c.validate(&map, &grid)?;
                run_on_map(c, rep, &map, &grid, &mut RunCapture::default())
            });
            SweepRow::new(i, c, rep, result)
        })
        .collect();
    let summary = summarize(&rows);
    SweepReport { rows, summary }
}

/// Pairs arms by scenario in order of first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys = Vec::new();
    for r in rows {
        if !keys.contains(&r.scenario_key()) {
            keys.push(r.scenario_key());
        }
    }
    let mut out = Vec::new();
    for key in keys {
        let arm = |mode: PlannerMode| -> Vec<RunMetrics> {
            rows.iter()
                .filter(|r| r.scenario_key() == key && r.planner == mode)
                .filter_map(SweepRow::metrics)
                .collect()
        };
        let (a, b) = (arm(PlannerMode::AStar), arm(PlannerMode::CsAStar));
        let Ok(report) = super::compare(&a, &b) else {
            continue;
        };
        let first = rows.iter().find(|r| r.scenario_key() == key).expect("key from rows");
        let t = |m: &MetricComparison| m.welch.map(|w| w.t);
        let p = |m: &MetricComparison| m.significance.as_str().to_string();
        let (tm, di, cl, ri) = (&report.time, &report.distance, &report.clearance, &report.risky_actions);
        out.push(SummaryRow {
            crowd_size: first.crowd_size,
            behavior: first.behavior,
            avoidance: first.avoidance,
            target_set: first.target_set.clone(),
            alpha: first.alpha,
            runs_astar: a.len(),
            runs_csastar: b.len(),
            time_astar: tm.mean_a,
            time_csastar: tm.mean_b,
            time_pct: tm.percent_change,
            time_t: t(tm),
            time_p: p(tm),
            time_d: tm.cohens_d,
            distance_astar: di.mean_a,
            distance_csastar: di.mean_b,
            distance_pct: di.percent_change,
            distance_t: t(di),
            distance_p: p(di),
            distance_d: di.cohens_d,
            clearance_astar: cl.mean_a,
            clearance_csastar: cl.mean_b,
            clearance_pct: cl.percent_change,
            clearance_t: t(cl),
            clearance_p: p(cl),
            clearance_d: cl.cohens_d,
            risky_astar: ri.mean_a,
            risky_csastar: ri.mean_b,
            risky_pct: ri.percent_change,
            risky_t: t(ri),
            risky_p: p(ri),
            risky_d: ri.cohens_d,
        });
    }
    out
}
