//! Online crowd density map.
//!
//! Every cell keeps a visit weight `k`, a person-count weight `t` and the
//! density `d = t / k`. Each update ages both weights by the discount
//! factor, adds the people currently counted in the cell to `t`, adds one
//! to `k` for cells the robot can currently see, and recomputes `d`. The
//! cost of an update is one pass over the observed people plus one pass
//! over the cells.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{line_of_sight, normalize_angle, angle_difference, CellIndex, EnvironmentMap, Grid, Point, Pose};

/// People detected during one control cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCrowdObservation {
    pub cycle: u64,
    pub people: Vec<Point>,
    pub robot_pose: Pose,
}

/// Row-major boolean mask over a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMask {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl CellMask {
    pub fn new(rows: usize, cols: usize, value: bool) -> Self {
        Self {
            rows,
            cols,
            cells: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                actual: cells.len(),
            });
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, idx: CellIndex) -> bool {
        self.cells[idx.row * self.cols + idx.col]
    }

    pub fn set(&mut self, idx: CellIndex, value: bool) {
        self.cells[idx.row * self.cols + idx.col] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.cells
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&v| v).count()
    }
}

/// Cells whose centers are within `range`, inside the angular field of view
/// around the heading, and in line of sight of the pose.
pub fn visibility_mask(pose: &Pose, map: &EnvironmentMap, grid: &Grid, range: f64, fov: f64) -> CellMask {
    let mut mask = CellMask::new(grid.rows(), grid.cols(), false);
    for idx in grid.cells() {
        let center = grid.cell_center(idx).expect("cell from grid iterator");
        if in_sensor_cone(pose, center, range, fov) && line_of_sight(pose.position, center, map) {
            mask.set(idx, true);
        }
    }
    mask
}

/// Range and field-of-view part of the visibility test (no occlusion).
pub fn in_sensor_cone(pose: &Pose, p: Point, range: f64, fov: f64) -> bool {
    let offset = p - pose.position;
    let dist = offset.length();
    if dist > range {
        return false;
    }
    if dist == 0.0 || fov >= std::f64::consts::TAU {
        return true;
    }
    let bearing = normalize_angle(offset.angle());
    angle_difference(pose.heading(), bearing).abs() <= fov / 2.0
}

/// One applied update, retained for offline verification.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedUpdate {
    pub people: Vec<Point>,
    pub visible: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct DensityMap {
    grid: Grid,
    alpha: f64,
    k: Vec<f64>,
    t: Vec<f64>,
    d: Vec<f64>,
    updates: u64,
    strict_visibility: bool,
    log: Option<(usize, VecDeque<LoggedUpdate>)>,
}

impl DensityMap {
    pub fn new(grid: Grid, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("discount factor must be in (0, 1], got {alpha}")));
        }
        let n = grid.len();
        Ok(Self {
            grid,
            alpha,
            k: vec![0.0; n],
            t: vec![0.0; n],
            d: vec![0.0; n],
            updates: 0,
            strict_visibility: false,
            log: None,
        })
    }

    /// Only count people in cells that are visible this cycle. Off by
    /// default: the standard update adds people to `t` regardless of the
    /// mask and gates only `k` on visibility.
    pub fn with_strict_visibility(mut self, strict: bool) -> Self {
        self.strict_visibility = strict;
        self
    }

    /// Keep the last `capacity` updates (people and mask).
    pub fn with_observation_log(mut self, capacity: usize) -> Self {
        self.log = Some((capacity, VecDeque::new()));
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn visits(&self) -> &[f64] {
        &self.k
    }

    pub fn counts(&self) -> &[f64] {
        &self.t
    }

    pub fn densities(&self) -> &[f64] {
        &self.d
    }

    pub fn density(&self, idx: CellIndex) -> f64 {
        self.d[self.grid.id(idx)]
    }

    pub fn observation_log(&self) -> Option<impl Iterator<Item = &LoggedUpdate>> {
        self.log.as_ref().map(|(_, log)| log.iter())
    }

    /// Applies one observation. The observation is validated up front; on
    /// error the map is left untouched.
    pub fn update(&mut self, obs: &LocalCrowdObservation, visible: &CellMask) -> Result<()> {
        if visible.rows() != self.grid.rows() || visible.cols() != self.grid.cols() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                actual: visible.as_slice().len(),
            });
        }
        let mut curr = vec![0u32; self.grid.len()];
        for &p in &obs.people {
            if !p.is_finite() {
                return Err(Error::NonFinite("observed person location"));
            }
            let idx = self.grid.world_to_cell(p)?;
            curr[self.grid.id(idx)] += 1;
        }

        let alpha = self.alpha;
        let vis = visible.as_slice();
        for i in 0..self.grid.len() {
            let seen = if self.strict_visibility && !vis[i] { 0 } else { curr[i] };
            self.t[i] = self.t[i] * alpha + f64::from(seen);
            self.k[i] *= alpha;
            if vis[i] {
                self.k[i] += 1.0;
            }
            self.d[i] = if self.k[i] > 0.0 { self.t[i] / self.k[i] } else { 0.0 };
        }
        self.updates += 1;

        if let Some((cap, log)) = &mut self.log {
            if *cap > 0 {
                if log.len() == *cap {
                    log.pop_front();
                }
                log.push_back(LoggedUpdate {
                    people: obs.people.clone(),
                    visible: vis.to_vec(),
                });
            }
        }
        Ok(())
    }

    /// Min-max normalized densities in `[0, 1]`; all zero when the map is flat.
    pub fn normalized(&self) -> Vec<f64> {
        normalized_densities(self)
    }

    pub fn to_file(&self) -> DensityMapFile {
        DensityMapFile {
            rows: self.grid.rows(),
            cols: self.grid.cols(),
            cell_size: self.grid.cell_size(),
            width: self.grid.width(),
            height: self.grid.height(),
            alpha: self.alpha,
            updates: self.updates,
            k: self.k.clone(),
            t: self.t.clone(),
            d: self.d.clone(),
        }
    }

    pub fn from_file(file: DensityMapFile) -> Result<Self> {
        let grid = Grid::new(file.width, file.height, file.cell_size)?;
        if grid.rows() != file.rows || grid.cols() != file.cols {
            return Err(Error::InvalidParameter(format!(
                "grid {}x{} does not match dimensions {}x{}",
                file.rows,
                file.cols,
                grid.rows(),
                grid.cols()
            )));
        }
        for arr in [&file.k, &file.t, &file.d] {
            if arr.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    actual: arr.len(),
                });
            }
        }
        let mut map = Self::new(grid, file.alpha)?;
        map.k = file.k;
        map.t = file.t;
        map.d = file.d;
        map.updates = file.updates;
        Ok(map)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Heatmap CSV, one line per grid row starting from row 0 (bottom of the map).
    pub fn heatmap_csv(&self, normalized: bool) -> String {
        let values = if normalized { self.normalized() } else { self.d.clone() };
        let mut out = String::new();
        for row in values.chunks(self.grid.cols()) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Checkpoint format: dimensions, discount factor and the three arrays in
/// row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMapFile {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    pub width: f64,
    pub height: f64,
    pub alpha: f64,
    #[serde(default)]
    pub updates: u64,
    pub k: Vec<f64>,
    pub t: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn normalized_densities(map: &DensityMap) -> Vec<f64> {
    let d = map.densities();
    let (lo, hi) = d
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if d.is_empty() || hi <= lo {
        return vec![0.0; d.len()];
    }
    let span = hi - lo;
    d.iter().map(|&v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Segment;

    fn obs(people: Vec<Point>) -> LocalCrowdObservation {
        LocalCrowdObservation {
            cycle: 0,
            people,
            robot_pose: Pose::new(Point::new(1.0, 1.0), 0.0),
        }
    }

    #[test]
    fn fresh_map_all_visible_no_people() {
        let grid = Grid::new(9.0, 9.0, 3.0).unwrap();
        let mut m = DensityMap::new(grid, 1.0).unwrap();
        m.update(&obs(vec![]), &CellMask::new(3, 3, true)).unwrap();
        assert!(m.visits().iter().all(|&k| k == 1.0));
        assert!(m.counts().iter().all(|&t| t == 0.0));
        assert!(m.densities().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn aged_update_by_hand() {
        // k=2, t=4 in cell (0,0); one person; visible; alpha=0.5
        let grid = Grid::new(3.0, 3.0, 3.0).unwrap();
        let mut m = DensityMap::new(grid, 0.5).unwrap();
        m.k[0] = 2.0;
        m.t[0] = 4.0;
        m.update(&obs(vec![Point::new(1.0, 1.0)]), &CellMask::new(1, 1, true)).unwrap();
        assert_eq!(m.counts()[0], 3.0);
        assert_eq!(m.visits()[0], 2.0);
        assert_eq!(m.densities()[0], 1.5);
    }

    #[test]
    fn unvisited_cells_have_zero_density_but_still_count_people() {
        let grid = Grid::new(6.0, 3.0, 3.0).unwrap();
        let mut m = DensityMap::new(grid, 1.0).unwrap();
        let mask = CellMask::from_vec(1, 2, vec![true, false]).unwrap();
        m.update(&obs(vec![Point::new(4.0, 1.0)]), &mask).unwrap();
        assert_eq!(m.counts()[1], 1.0);
        assert_eq!(m.visits()[1], 0.0);
        assert_eq!(m.densities()[1], 0.0);

        let mut strict = DensityMap::new(grid, 1.0).unwrap().with_strict_visibility(true);
        strict.update(&obs(vec![Point::new(4.0, 1.0)]), &mask).unwrap();
        assert_eq!(strict.counts()[1], 0.0);
    }

    #[test]
    fn rejects_bad_observations_without_mutation() {
        let grid = Grid::new(6.0, 6.0, 3.0).unwrap();
        let mut m = DensityMap::new(grid, 1.0).unwrap();
        let mask = CellMask::new(2, 2, true);
        let err = m.update(&obs(vec![Point::new(1.0, 1.0), Point::new(7.0, 1.0)]), &mask);
        assert!(matches!(err, Err(Error::OutOfBounds(_))));
        assert!(matches!(
            m.update(&obs(vec![Point::new(f64::NAN, 1.0)]), &mask),
            Err(Error::NonFinite(_))
        ));
        assert!(m.update(&obs(vec![]), &CellMask::new(3, 2, true)).is_err());
        assert_eq!(m.updates(), 0);
        assert!(m.counts().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn alpha_must_be_in_half_open_unit_interval() {
        let grid = Grid::new(3.0, 3.0, 3.0).unwrap();
        assert!(DensityMap::new(grid, 0.0).is_err());
        assert!(DensityMap::new(grid, 1.5).is_err());
        assert!(DensityMap::new(grid, f64::NAN).is_err());
        assert!(DensityMap::new(grid, 1.0).is_ok());
    }

    #[test]
    fn normalization_examples() {
        let grid = Grid::new(9.0, 3.0, 3.0).unwrap();
        let mut m = DensityMap::new(grid, 1.0).unwrap();
        assert_eq!(m.normalized(), vec![0.0; 3]);
        m.d = vec![1.0, 2.0, 4.0];
        let n = m.normalized();
        assert_eq!(n[0], 0.0);
        assert!((n[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(n[2], 1.0);
        m.d = vec![2.0; 3];
        assert_eq!(m.normalized(), vec![0.0; 3]);
    }

    #[test]
    fn visibility_in_open_room_and_behind_wall() {
        let map = EnvironmentMap::open(9.0, 9.0).unwrap();
        let grid = Grid::for_map(&map, 3.0).unwrap();
        let pose = Pose::new(Point::new(4.0, 4.0), 0.0);
        let mask = visibility_mask(&pose, &map, &grid, 20.0, std::f64::consts::TAU);
        assert_eq!(mask.count(), 9);

        let wall = Segment::new(Point::new(6.0, 0.0), Point::new(6.0, 9.0));
        let map = EnvironmentMap::new(9.0, 9.0, vec![wall]).unwrap();
        let mask = visibility_mask(&pose, &map, &grid, 20.0, std::f64::consts::TAU);
        assert!(!mask.get(CellIndex::new(1, 2)));
        assert!(mask.get(CellIndex::new(1, 0)));
    }

    #[test]
    fn visibility_respects_range_and_fov() {
        let map = EnvironmentMap::open(30.0, 3.0).unwrap();
        let grid = Grid::for_map(&map, 3.0).unwrap();
        let pose = Pose::new(Point::new(13.5, 1.5), 0.0);
        let mask = visibility_mask(&pose, &map, &grid, 7.0, 220f64.to_radians());
        // center cell (distance 0) counts as visible; behind is outside the fov
        assert!(mask.get(CellIndex::new(0, 4)));
        assert!(mask.get(CellIndex::new(0, 6)));
        assert!(!mask.get(CellIndex::new(0, 7)));
        assert!(!mask.get(CellIndex::new(0, 3)));
    }

    #[test]
    fn checkpoint_round_trip() {
        let grid = Grid::new(6.0, 6.0, 3.0).unwrap();
        let mut m = DensityMap::new(grid, 0.9).unwrap();
        m.update(&obs(vec![Point::new(1.0, 4.0)]), &CellMask::new(2, 2, true)).unwrap();
        let file = m.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let back = DensityMap::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.to_file(), file);
        assert_eq!(m.heatmap_csv(false), "0,0\n1,0\n");
    }
}
