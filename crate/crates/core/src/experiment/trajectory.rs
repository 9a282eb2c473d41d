//! Per-cycle trajectory log and offline metric recomputation.
//!
//! Each control cycle writes one `robot` row (pose at sense time plus the
//! odometry of the action that followed) and one `agent` row per person
//! at that instant. Floats are written in shortest round-trip form, so a
//! replay reproduces the online metrics bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_to_nearest_obstacle, EnvironmentMap, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Robot,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub cycle: u64,
    pub time: f64,
    pub kind: RowKind,
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub odometry: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryLog {
    pub fn push_cycle(&mut self, cycle: u64, time: f64, robot: (Point, f64), odometry: f64, agents: &[Point]) {
        self.rows.push(TrajectoryRow {
            cycle,
            time,
            kind: RowKind::Robot,
            id: 0,
            x: robot.0.x,
            y: robot.0.y,
            heading: robot.1,
            odometry,
        });
        self.rows.extend(agents.iter().enumerate().map(|(id, p)| TrajectoryRow {
            cycle,
            time,
            kind: RowKind::Agent,
            id,
            x: p.x,
            y: p.y,
            heading: 0.0,
            odometry: 0.0,
        }));
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<Vec<TrajectoryRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayMetrics {
    pub cycles: u64,
    pub total_distance: f64,
    pub clearance: f64,
    pub risky_actions: u64,
}

/// Recomputes distance, clearance and risky actions from a log.
pub fn replay(log: &TrajectoryLog, map: &EnvironmentMap, risky_threshold: f64) -> Result<ReplayMetrics> {
    let mut cycles = 0u64;
    let mut distance = 0.0;
    let mut clearance_sum = 0.0;
    let mut risky = 0u64;
    let mut rows = log.rows.iter().peekable();
    let mut agents = Vec::new();
    while let Some(robot) = rows.next() {
        if robot.kind != RowKind::Robot {
            return Err(Error::Trajectory(format!("agent row without a robot row in cycle {}", robot.cycle)));
        }
        agents.clear();
        while let Some(a) = rows.next_if(|r| r.kind == RowKind::Agent) {
            if a.cycle != robot.cycle {
                return Err(Error::Trajectory(format!("agent row of cycle {} inside cycle {}", a.cycle, robot.cycle)));
            }
            agents.push(Point::new(a.x, a.y));
        }
        let clear = distance_to_nearest_obstacle(Point::new(robot.x, robot.y), map, &agents);
        clearance_sum += clear;
        if clear < risky_threshold {
            risky += 1;
        }
        distance += robot.odometry;
        cycles += 1;
    }
    Ok(ReplayMetrics {
        cycles,
        total_distance: distance,
        clearance: if cycles == 0 { 0.0 } else { clearance_sum / cycles as f64 },
        risky_actions: risky,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut log = TrajectoryLog::default();
        log.push_cycle(0, 0.1, (Point::new(0.1 + 0.2, 1.0 / 3.0), 2.0f64.sqrt()), 0.7, &[Point::new(5.0, 5.0)]);
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert_eq!(TrajectoryLog::read_csv(&buf[..]).unwrap(), log);
    }

    #[test]
    fn replay_counts_risky_cycles() {
        let map = EnvironmentMap::open(10.0, 10.0).unwrap();
        let mut log = TrajectoryLog::default();
        log.push_cycle(0, 0.0, (Point::new(5.0, 5.0), 0.0), 1.0, &[Point::new(5.3, 5.0)]);
        log.push_cycle(1, 1.0, (Point::new(5.0, 6.0), 0.0), 0.5, &[]);
        let m = replay(&log, &map, 0.5).unwrap();
        assert_eq!(m.cycles, 2);
        assert_eq!(m.risky_actions, 1);
        assert_eq!(m.total_distance, 1.5);
        assert!((m.clearance - (0.3 + 4.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn orphan_agent_row_is_rejected() {
        let map = EnvironmentMap::open(10.0, 10.0).unwrap();
        let mut log = TrajectoryLog::default();
        log.push_cycle(0, 0.0, (Point::new(5.0, 5.0), 0.0), 1.0, &[Point::new(1.0, 1.0)]);
        log.rows.remove(0);
        assert!(matches!(replay(&log, &map, 0.5), Err(Error::Trajectory(_))));
    }
}
