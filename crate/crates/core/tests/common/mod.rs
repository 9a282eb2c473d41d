//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crowdnav::geometry::{EnvironmentMap, Point, Segment};
use crowdnav::planner::GridGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` map with each cell blocked with probability `density`.
pub fn random_cell_map(rows: usize, cols: usize, density: f64, seed: u64) -> (EnvironmentMap, Vec<bool>) {
    let mut r = rng(seed);
    let blocked: Vec<bool> = (0..rows * cols).map(|_| r.random_bool(density)).collect();
    let map = EnvironmentMap::from_blocked_cells(rows, cols, 3.0, &blocked).unwrap();
    (map, blocked)
}

/// Plain Dijkstra with running sums. Returns the node path.
pub fn dijkstra(graph: &GridGraph, start: usize, goal: usize) -> Option<Vec<usize>> {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Item(0.0, start));
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == goal {
            break;
        }
        for e in graph.edges(u) {
            let nd = d + e.weight;
            if nd < dist[e.to] {
                dist[e.to] = nd;
                prev[e.to] = u;
                heap.push(Item(nd, e.to));
            }
        }
    }
    if !dist[goal].is_finite() {
        return None;
    }
    let mut path = vec![goal];
    while *path.last().unwrap() != start {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path)
}

fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection by orientation tests.
pub fn segments_touch(p: Segment, q: Segment) -> bool {
    let d1 = cross(q.a, q.b, p.a);
    let d2 = cross(q.a, q.b, p.b);
    let d3 = cross(p.a, p.b, q.a);
    let d4 = cross(p.a, p.b, q.b);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    (d1 == 0.0 && on_segment(q.a, q.b, p.a))
        || (d2 == 0.0 && on_segment(q.a, q.b, p.b))
        || (d3 == 0.0 && on_segment(p.a, p.b, q.a))
        || (d4 == 0.0 && on_segment(p.a, p.b, q.b))
}

pub fn boundary(map: &EnvironmentMap) -> Vec<Segment> {
    let (w, h) = (map.width(), map.height());
    let c = [Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)];
    (0..4).map(|i| Segment::new(c[i], c[(i + 1) % 4])).collect()
}

pub fn all_walls(map: &EnvironmentMap) -> Vec<Segment> {
    let mut v = boundary(map);
    v.extend_from_slice(map.walls());
    v
}

pub fn los_oracle(a: Point, b: Point, map: &EnvironmentMap) -> bool {
    a == b || !all_walls(map).into_iter().any(|w| segments_touch(Segment::new(a, b), w))
}

pub fn point_segment_distance(p: Point, s: Segment) -> f64 {
    let (dx, dy) = (s.b.x - s.a.x, s.b.y - s.a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (s.a.x + t * dx, s.a.y + t * dy);
    ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
}

/// Ray/segment hit distance by solving the 2x2 system directly.
pub fn ray_hit(origin: Point, angle: f64, s: Segment) -> Option<f64> {
    let (dx, dy) = (angle.cos(), angle.sin());
    let (ex, ey) = (s.b.x - s.a.x, s.b.y - s.a.y);
    let det = dx * (-ey) - dy * (-ex);
    if det.abs() < 1e-15 {
        return None;
    }
    let (rx, ry) = (s.a.x - origin.x, s.a.y - origin.y);
    let t = (rx * (-ey) - ry * (-ex)) / det;
    let u = (dx * ry - dy * rx) / det;
    (t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u)).then_some(t)
}

/// A small cubicle-style map with a few free-standing walls.
pub fn sample_walls_map(seed: u64) -> EnvironmentMap {
    let mut r = rng(seed);
    let walls = (0..8)
        .map(|_| {
            let a = Point::new(r.random_range(1.0..23.0), r.random_range(1.0..17.0));
            let b = Point::new(r.random_range(1.0..23.0), r.random_range(1.0..17.0));
            Segment::new(a, b)
        })
        .collect();
    EnvironmentMap::new(24.0, 18.0, walls).unwrap()
}
