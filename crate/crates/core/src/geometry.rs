//! Planar geometry, the static wall map, grid discretization and the
//! sensing primitives (line of sight, range rays, obstacle distance).
//!
//! Coordinates are meters in the allocentric map frame with the origin at
//! the lower-left corner. Grid rows run along `y` and columns along `x`;
//! cells are half-open and lower-inclusive.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default grid cell size in meters.
pub const DEFAULT_CELL_SIZE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// Positions and displacements share one representation.
pub type Point = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unit vector in the same direction, or zero for the zero vector.
    pub fn normalized(self) -> Vec2 {
        let len = self.length();
        if len > 0.0 {
            self * (1.0 / len)
        } else {
            Vec2::ZERO
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = theta.rem_euclid(TAU);
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Signed smallest difference `to - from`, in `(-π, π]`.
pub fn angle_difference(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// Position plus heading; the heading is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point,
    heading: f64,
}

impl Pose {
    pub fn new(position: Point, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }

    pub fn rotated(&self, delta: f64) -> Pose {
        Pose::new(self.position, self.heading + delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

// Assumes `p` is collinear with `a`-`b`.
fn within_box(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn closest_point(&self, p: Point) -> Point {
        let ab = self.b - self.a;
        let len2 = ab.length_squared();
        if len2 == 0.0 {
            return self.a;
        }
        let s = ((p - self.a).dot(ab) / len2).clamp(0.0, 1.0);
        self.a + ab * s
    }

    pub fn distance_to_point(&self, p: Point) -> f64 {
        self.closest_point(p).distance(p)
    }

    /// Closed-segment intersection: shared endpoints and collinear overlap
    /// count as intersecting.
    pub fn intersects(&self, other: &Segment) -> bool {
        let (p1, p2, q1, q2) = (self.a, self.b, other.a, other.b);
        let d1 = orient(q1, q2, p1);
        let d2 = orient(q1, q2, p2);
        let d3 = orient(p1, p2, q1);
        let d4 = orient(p1, p2, q2);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && within_box(q1, q2, p1))
            || (d2 == 0.0 && within_box(q1, q2, p2))
            || (d3 == 0.0 && within_box(p1, p2, q1))
            || (d4 == 0.0 && within_box(p1, p2, q2))
    }

    pub fn distance_to_segment(&self, other: &Segment) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        self.distance_to_point(other.a)
            .min(self.distance_to_point(other.b))
            .min(other.distance_to_point(self.a))
            .min(other.distance_to_point(self.b))
    }

    /// Distance along the ray `origin + t * dir` (`dir` unit length) to the
    /// first point of this segment, if any.
    pub fn ray_intersection(&self, origin: Point, dir: Vec2) -> Option<f64> {
        let e = self.b - self.a;
        let w = self.a - origin;
        let denom = dir.cross(e);
        if denom != 0.0 {
            let t = w.cross(e) / denom;
            let s = w.cross(dir) / denom;
            if t >= 0.0 && (0.0..=1.0).contains(&s) {
                return Some(t);
            }
            return None;
        }
        if w.cross(dir) != 0.0 {
            return None;
        }
        // collinear
        let ta = w.dot(dir);
        let tb = (self.b - origin).dot(dir);
        if ta < 0.0 && tb < 0.0 {
            None
        } else if ta * tb <= 0.0 {
            Some(0.0)
        } else {
            Some(ta.min(tb))
        }
    }
}

/// Distance along the ray to the first point of a disc, `Some(0.0)` when the
/// origin is already inside it.
pub fn ray_circle_intersection(origin: Point, dir: Vec2, center: Point, radius: f64) -> Option<f64> {
    let m = origin - center;
    let c = m.length_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = m.dot(dir);
    if b > 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some((-b - disc.sqrt()).max(0.0))
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    width: f64,
    height: f64,
    walls: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
}

/// Static environment: a closed rectangle with interior wall segments.
///
/// The rectangle boundary is always an obstacle; it is not listed in
/// [`EnvironmentMap::walls`] but is included in every query.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    width: f64,
    height: f64,
    walls: Vec<Segment>,
    obstacles: Vec<Segment>,
}

impl EnvironmentMap {
    pub fn new(width: f64, height: f64, walls: Vec<Segment>) -> Result<Self> {
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(Error::InvalidMap(format!(
                "dimensions must be positive, got {width} x {height}"
            )));
        }
        for w in &walls {
            for p in [w.a, w.b] {
                if !p.is_finite() || p.x < 0.0 || p.x > width || p.y < 0.0 || p.y > height {
                    return Err(Error::InvalidMap(format!("wall endpoint {p} outside the map")));
                }
            }
        }
        let corners = [
            Point::new(0.0, 0.0),
            Point::new(width, 0.0),
            Point::new(width, height),
            Point::new(0.0, height),
        ];
        let mut obstacles: Vec<Segment> = (0..4)
            .map(|i| Segment::new(corners[i], corners[(i + 1) % 4]))
            .collect();
        obstacles.extend(walls.iter().copied());
        Ok(Self {
            width,
            height,
            walls,
            obstacles,
        })
    }

    /// Empty rectangular room.
    pub fn open(width: f64, height: f64) -> Result<Self> {
        Self::new(width, height, Vec::new())
    }

    /// Map whose blocked cells (row-major, `rows * cols`) are walled in by
    /// their outlines. Shared edges are emitted once.
    pub fn from_blocked_cells(rows: usize, cols: usize, cell_size: f64, blocked: &[bool]) -> Result<Self> {
        if blocked.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                actual: blocked.len(),
            });
        }
        let is_blocked = |r: isize, c: isize| {
            r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols && blocked[r as usize * cols + c as usize]
        };
        let mut walls = Vec::new();
        let p = |c: usize, r: usize| Point::new(c as f64 * cell_size, r as f64 * cell_size);
        for r in 0..rows {
            for c in 0..cols {
                if !blocked[r * cols + c] {
                    continue;
                }
                let (ri, ci) = (r as isize, c as isize);
                // bottom and left edges always; top/right only if the neighbor is free
                if !is_blocked(ri - 1, ci) || r == 0 {
                    walls.push(Segment::new(p(c, r), p(c + 1, r)));
                }
                if !is_blocked(ri, ci - 1) || c == 0 {
                    walls.push(Segment::new(p(c, r), p(c, r + 1)));
                }
                if !is_blocked(ri + 1, ci) {
                    walls.push(Segment::new(p(c, r + 1), p(c + 1, r + 1)));
                }
                if !is_blocked(ri, ci + 1) {
                    walls.push(Segment::new(p(c + 1, r), p(c + 1, r + 1)));
                }
            }
        }
        Self::new(cols as f64 * cell_size, rows as f64 * cell_size, walls)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Interior walls only.
    pub fn walls(&self) -> &[Segment] {
        &self.walls
    }

    /// Interior walls plus the four boundary segments.
    pub fn obstacles(&self) -> &[Segment] {
        &self.obstacles
    }

    pub fn contains(&self, p: Point) -> bool {
        p.is_finite() && p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn line_of_sight(&self, a: Point, b: Point) -> bool {
        line_of_sight(a, b, self)
    }

    /// Smallest distance between the segment `a`-`b` and any obstacle.
    pub fn segment_clearance(&self, a: Point, b: Point) -> f64 {
        let s = Segment::new(a, b);
        self.obstacles
            .iter()
            .map(|w| w.distance_to_segment(&s))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn wall_distance(&self, p: Point) -> f64 {
        self.obstacles
            .iter()
            .map(|w| w.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(s)?;
        let walls = file
            .walls
            .iter()
            .map(|w| Segment::new(Point::new(w[0], w[1]), Point::new(w[2], w[3])))
            .collect();
        Self::new(file.width, file.height, walls)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = MapFile {
            width: self.width,
            height: self.height,
            walls: self.walls.iter().map(|w| [w.a.x, w.a.y, w.b.x, w.b.y]).collect(),
            description: None,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// The bundled 48 m x 36 m cubicle office.
    ///
    /// Drawn on a 3 m lattice: closed cubicle blocks separated by 3 m
    /// aisles, a 6 m central hall along `y = 18`, and open rooms in the four
    /// corners.
    pub fn office() -> Self {
        Self::from_json_str(crate::assets::OFFICE_MAP_JSON).expect("bundled office map is valid")
    }
}

/// True iff the segment `a`-`b` touches no wall (boundary included).
/// Touching a wall endpoint blocks the view.
pub fn line_of_sight(a: Point, b: Point, map: &EnvironmentMap) -> bool {
    if a == b {
        return true;
    }
    let s = Segment::new(a, b);
    !map.obstacles.iter().any(|w| w.intersects(&s))
}

/// Range readings for `n_rays` beams spread evenly over `fov`, centered on
/// the pose heading and ordered from the rightmost beam counter-clockwise.
/// Readings are capped at `range`.
pub fn cast_rays(pose: &Pose, range: f64, fov: f64, n_rays: usize, map: &EnvironmentMap) -> Vec<f64> {
    let origin = pose.position;
    (0..n_rays)
        .map(|i| {
            let offset = if n_rays == 1 {
                0.0
            } else {
                -fov / 2.0 + fov * i as f64 / (n_rays - 1) as f64
            };
            let dir = Vec2::from_angle(pose.heading() + offset);
            map.obstacles
                .iter()
                .filter_map(|w| w.ray_intersection(origin, dir))
                .fold(range, f64::min)
        })
        .collect()
}

/// Minimum over wall distances (boundary included) and Euclidean distances
/// to the given agent positions.
pub fn distance_to_nearest_obstacle(p: Point, map: &EnvironmentMap, agents: &[Point]) -> f64 {
    agents
        .iter()
        .map(|a| a.distance(p))
        .fold(map.wall_distance(p), f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// `rows x cols` discretization of a map with square cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cell_size: f64,
    width: f64,
    height: f64,
}

impl Grid {
    pub fn new(width: f64, height: f64, cell_size: f64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidParameter(format!("cell size must be positive, got {cell_size}")));
        }
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid extent must be positive, got {width} x {height}"
            )));
        }
        Ok(Self {
            rows: (height / cell_size).ceil() as usize,
            cols: (width / cell_size).ceil() as usize,
            cell_size,
            width,
            height,
        })
    }

    pub fn for_map(map: &EnvironmentMap, cell_size: f64) -> Result<Self> {
        Self::new(map.width(), map.height(), cell_size)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: Point) -> bool {
        p.is_finite() && p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn world_to_cell(&self, p: Point) -> Result<CellIndex> {
        if !self.contains(p) {
            return Err(Error::OutOfBounds(p));
        }
        let row = ((p.y / self.cell_size).floor() as usize).min(self.rows - 1);
        let col = ((p.x / self.cell_size).floor() as usize).min(self.cols - 1);
        Ok(CellIndex { row, col })
    }

    /// Center of the cell. For edge cells cut by a map dimension that is not
    /// a multiple of the cell size, the center of the in-map part.
    pub fn cell_center(&self, idx: CellIndex) -> Result<Point> {
        self.check(idx)?;
        let lo_x = idx.col as f64 * self.cell_size;
        let lo_y = idx.row as f64 * self.cell_size;
        let hi_x = (lo_x + self.cell_size).min(self.width);
        let hi_y = (lo_y + self.cell_size).min(self.height);
        Ok(Point::new((lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0))
    }

    pub fn check(&self, idx: CellIndex) -> Result<()> {
        if idx.row < self.rows && idx.col < self.cols {
            Ok(())
        } else {
            Err(Error::InvalidCell {
                index: idx,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Row-major id.
    pub fn id(&self, idx: CellIndex) -> usize {
        idx.row * self.cols + idx.col
    }

    pub fn cell(&self, id: usize) -> CellIndex {
        CellIndex::new(id / self.cols, id % self.cols)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.len()).map(move |id| self.cell(id))
    }

    /// In-grid members of the 8-neighborhood, in row-major order.
    pub fn neighbors(&self, idx: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        let (r, c) = (idx.row as isize, idx.col as isize);
        (-1..=1isize)
            .flat_map(move |dr| (-1..=1isize).map(move |dc| (dr, dc)))
            .filter(|&(dr, dc)| dr != 0 || dc != 0)
            .filter_map(move |(dr, dc)| {
                let (nr, nc) = (r + dr, c + dc);
                (nr >= 0 && nc >= 0 && (nr as usize) < self.rows && (nc as usize) < self.cols)
                    .then(|| CellIndex::new(nr as usize, nc as usize))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn office_grid() -> Grid {
        Grid::new(48.0, 36.0, 3.0).unwrap()
    }

    #[test]
    fn grid_dimensions_follow_ceiling() {
        let g = office_grid();
        assert_eq!((g.rows(), g.cols()), (12, 16));
        let g = Grid::new(10.0, 7.0, 3.0).unwrap();
        assert_eq!((g.rows(), g.cols()), (3, 4));
    }

    #[test]
    fn world_to_cell_examples() {
        let g = office_grid();
        assert_eq!(g.world_to_cell(Point::new(0.0, 0.0)).unwrap(), CellIndex::new(0, 0));
        assert_eq!(g.world_to_cell(Point::new(47.9, 35.9)).unwrap(), CellIndex::new(11, 15));
        assert_eq!(g.world_to_cell(Point::new(3.0, 3.0)).unwrap(), CellIndex::new(1, 1));
        // far boundary clamps into the last cell
        assert_eq!(g.world_to_cell(Point::new(48.0, 36.0)).unwrap(), CellIndex::new(11, 15));
    }

    #[test]
    fn world_to_cell_rejects_outside_points() {
        let g = office_grid();
        let err = g.world_to_cell(Point::new(-0.1, 2.0)).unwrap_err();
        assert!(err.to_string().contains("-0.1"), "{err}");
        assert!(g.world_to_cell(Point::new(f64::NAN, 2.0)).is_err());
        assert!(g.world_to_cell(Point::new(1.0, 36.5)).is_err());
    }

    #[test]
    fn cell_center_examples() {
        let g = office_grid();
        assert_eq!(g.cell_center(CellIndex::new(0, 0)).unwrap(), Point::new(1.5, 1.5));
        assert_eq!(g.cell_center(CellIndex::new(1, 2)).unwrap(), Point::new(7.5, 4.5));
        assert!(g.cell_center(CellIndex::new(12, 0)).is_err());
        assert!(g.cell_center(CellIndex::new(0, 16)).is_err());
    }

    #[test]
    fn cell_center_round_trip_including_partial_cells() {
        for g in [office_grid(), Grid::new(10.0, 7.0, 3.0).unwrap()] {
            for idx in g.cells() {
                let c = g.cell_center(idx).unwrap();
                assert_eq!(g.world_to_cell(c).unwrap(), idx);
            }
        }
    }

    #[test]
    fn neighbors_of_center_and_corner() {
        let g = Grid::new(9.0, 9.0, 3.0).unwrap();
        assert_eq!(g.neighbors(CellIndex::new(1, 1)).count(), 8);
        assert_eq!(g.neighbors(CellIndex::new(0, 0)).count(), 3);
    }

    #[test]
    fn pose_heading_is_normalized() {
        let p = Pose::new(Point::ZERO, -FRAC_PI_2);
        assert!((p.heading() - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert_eq!(Pose::new(Point::ZERO, TAU).heading(), 0.0);
        assert!(Pose::new(Point::ZERO, -1e-18).heading() < TAU);
    }

    #[test]
    fn angle_difference_wraps() {
        assert!((angle_difference(0.1, TAU - 0.1) + 0.2).abs() < 1e-12);
        assert!((angle_difference(0.0, PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn segment_intersection_cases() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(2.0, 0.0));
        assert!(s.intersects(&Segment::new(Point::new(1.0, -1.0), Point::new(1.0, 1.0))));
        // touching at an endpoint
        assert!(s.intersects(&Segment::new(Point::new(2.0, 0.0), Point::new(3.0, 1.0))));
        // collinear overlap and collinear disjoint
        assert!(s.intersects(&Segment::new(Point::new(1.5, 0.0), Point::new(4.0, 0.0))));
        assert!(!s.intersects(&Segment::new(Point::new(2.5, 0.0), Point::new(4.0, 0.0))));
        assert!(!s.intersects(&Segment::new(Point::new(0.0, 1.0), Point::new(2.0, 1.0))));
    }

    #[test]
    fn line_of_sight_blocked_by_wall_and_endpoint() {
        let wall = Segment::new(Point::new(5.0, 2.0), Point::new(5.0, 8.0));
        let map = EnvironmentMap::new(10.0, 10.0, vec![wall]).unwrap();
        let a = Point::new(2.0, 5.0);
        assert!(line_of_sight(a, a, &map));
        assert!(!line_of_sight(a, Point::new(8.0, 5.0), &map));
        assert!(line_of_sight(a, Point::new(8.0, 9.0), &map) == !wall.intersects(&Segment::new(a, Point::new(8.0, 9.0))));
        // passes exactly through the wall's endpoint
        assert!(!line_of_sight(Point::new(3.0, 0.0), Point::new(7.0, 4.0), &map));
        assert!(line_of_sight(Point::new(2.0, 9.0), Point::new(8.0, 9.0), &map));
    }

    #[test]
    fn rays_in_empty_room() {
        let map = EnvironmentMap::open(10.0, 10.0).unwrap();
        let pose = Pose::new(Point::new(5.0, 5.0), 0.0);
        let r = cast_rays(&pose, 25.0, PI, 3, &map);
        // right (-90°), ahead, left (+90°): all 5 m to the boundary
        for d in r {
            assert!((d - 5.0).abs() < 1e-9, "{d}");
        }
        let capped = cast_rays(&pose, 2.0, PI, 5, &map);
        assert!(capped.iter().all(|&d| d == 2.0));
    }

    #[test]
    fn center_ray_hits_wall_ahead() {
        let wall = Segment::new(Point::new(7.0, 0.0), Point::new(7.0, 10.0));
        let map = EnvironmentMap::new(20.0, 10.0, vec![wall]).unwrap();
        let pose = Pose::new(Point::new(5.0, 5.0), 0.0);
        let r = cast_rays(&pose, 25.0, 220f64.to_radians(), 661, &map);
        assert!((r[330] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nearest_obstacle_examples() {
        let map = EnvironmentMap::open(48.0, 36.0).unwrap();
        let c = Point::new(24.0, 18.0);
        assert_eq!(distance_to_nearest_obstacle(c, &map, &[]), 18.0);
        let wall = Segment::new(Point::new(5.0, 0.0), Point::new(5.0, 10.0));
        let map = EnvironmentMap::new(20.0, 10.0, vec![wall]).unwrap();
        let p = Point::new(10.0, 5.0);
        let d = distance_to_nearest_obstacle(p, &map, &[Point::new(10.3, 5.0)]);
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn map_json_round_trip_and_validation() {
        let map = EnvironmentMap::new(
            12.0,
            9.0,
            vec![Segment::new(Point::new(3.0, 0.0), Point::new(3.0, 6.0))],
        )
        .unwrap();
        let back = EnvironmentMap::from_json_str(&map.to_json_string().unwrap()).unwrap();
        assert_eq!(back, map);
        assert!(EnvironmentMap::from_json_str(r#"{"width":5,"height":5,"walls":[[0,0,6,0]]}"#).is_err());
        assert!(EnvironmentMap::open(0.0, 5.0).is_err());
    }

    #[test]
    fn blocked_cells_are_enclosed() {
        let mut blocked = vec![false; 9];
        blocked[4] = true;
        let map = EnvironmentMap::from_blocked_cells(3, 3, 1.0, &blocked).unwrap();
        assert_eq!(map.walls().len(), 4);
        assert!(!map.line_of_sight(Point::new(1.5, 1.5), Point::new(0.5, 1.5)));
        assert!(map.line_of_sight(Point::new(0.5, 0.5), Point::new(2.5, 0.5)));
    }

    #[test]
    fn office_map_loads() {
        let map = EnvironmentMap::office();
        assert_eq!((map.width(), map.height()), (48.0, 36.0));
        assert!(!map.walls().is_empty());
    }
}
