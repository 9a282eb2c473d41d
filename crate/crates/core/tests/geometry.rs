mod common;

use common::*;
use crowdnav::geometry::{
    cast_rays, distance_to_nearest_obstacle, line_of_sight, CellIndex, EnvironmentMap, Grid, Point, Pose, Segment,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn office_grid_corner_cell() {
    let g = Grid::new(48.0, 36.0, 3.0).unwrap();
    assert_eq!((g.rows(), g.cols()), (12, 16));
    assert_eq!(g.world_to_cell(Point::new(47.9, 35.9)).unwrap(), CellIndex::new(11, 15));
    assert_eq!(g.world_to_cell(Point::new(0.0, 0.0)).unwrap(), CellIndex::new(0, 0));
    assert_eq!(g.world_to_cell(Point::new(3.0, 3.0)).unwrap(), CellIndex::new(1, 1));
    assert_eq!(g.world_to_cell(Point::new(48.0, 36.0)).unwrap(), CellIndex::new(11, 15));
}

#[test]
fn line_of_sight_matches_oracle_on_random_pairs() {
    let mut r = rng(11);
    for seed in 0..10 {
        let map = sample_walls_map(seed);
        for _ in 0..10 {
            let a = Point::new(r.random_range(0.0..24.0), r.random_range(0.0..18.0));
            let b = Point::new(r.random_range(0.0..24.0), r.random_range(0.0..18.0));
            assert_eq!(line_of_sight(a, b, &map), los_oracle(a, b, &map), "{a} -> {b}");
        }
    }
}

#[test]
fn perpendicular_crossing_blocks() {
    let map = EnvironmentMap::new(10.0, 10.0, vec![Segment::new(Point::new(5.0, 2.0), Point::new(5.0, 8.0))]).unwrap();
    assert!(!line_of_sight(Point::new(2.0, 5.0), Point::new(8.0, 5.0), &map));
    assert!(line_of_sight(Point::new(2.0, 5.0), Point::new(2.0, 9.0), &map));
    let p = Point::new(4.0, 4.0);
    assert!(line_of_sight(p, p, &map));
}

#[test]
fn rays_match_brute_force_intersections() {
    let mut r = rng(5);
    for seed in 0..20 {
        let map = sample_walls_map(100 + seed);
        let walls = all_walls(&map);
        let pose = Pose::new(
            Point::new(r.random_range(0.5..23.5), r.random_range(0.5..17.5)),
            r.random_range(0.0..std::f64::consts::TAU),
        );
        let (range, fov, n) = (25.0, 220f64.to_radians(), 67);
        let got = cast_rays(&pose, range, fov, n, &map);
        assert_eq!(got, cast_rays(&pose, range, fov, n, &map));
        for (i, &d) in got.iter().enumerate() {
            let angle = pose.heading() - fov / 2.0 + fov * i as f64 / (n - 1) as f64;
            let want = walls
                .iter()
                .filter_map(|w| ray_hit(pose.position, angle, *w))
                .fold(range, f64::min);
            assert!((d - want).abs() < 1e-9, "ray {i}: {d} vs {want}");
        }
    }
}

#[test]
fn nearest_obstacle_examples() {
    let map = EnvironmentMap::open(48.0, 36.0).unwrap();
    assert_eq!(distance_to_nearest_obstacle(Point::new(24.0, 18.0), &map, &[]), 18.0);
    let p = Point::new(5.0, 5.0);
    assert!((distance_to_nearest_obstacle(p, &map, &[Point::new(5.3, 5.0)]) - 0.3).abs() < 1e-12);
}

#[test]
fn nearest_obstacle_matches_brute_force() {
    let mut r = rng(9);
    for seed in 0..20 {
        let map = sample_walls_map(200 + seed);
        let walls = all_walls(&map);
        let agents: Vec<Point> = (0..r.random_range(0..12))
            .map(|_| Point::new(r.random_range(0.0..24.0), r.random_range(0.0..18.0)))
            .collect();
        for _ in 0..10 {
            let p = Point::new(r.random_range(0.0..24.0), r.random_range(0.0..18.0));
            let want = walls
                .iter()
                .map(|w| point_segment_distance(p, *w))
                .chain(agents.iter().map(|a| ((a.x - p.x).powi(2) + (a.y - p.y).powi(2)).sqrt()))
                .fold(f64::INFINITY, f64::min);
            assert!((distance_to_nearest_obstacle(p, &map, &agents) - want).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn world_to_cell_is_total_and_in_range(w in 1.0f64..60.0, h in 1.0f64..60.0, fx in 0.0f64..=1.0, fy in 0.0f64..=1.0) {
        let g = Grid::new(w, h, 3.0).unwrap();
        prop_assert_eq!(g.rows(), (h / 3.0).ceil() as usize);
        prop_assert_eq!(g.cols(), (w / 3.0).ceil() as usize);
        let c = g.world_to_cell(Point::new(fx * w, fy * h)).unwrap();
        prop_assert!(c.row < g.rows() && c.col < g.cols());
    }

    #[test]
    fn every_cell_round_trips(w in 1.0f64..60.0, h in 1.0f64..60.0) {
        let g = Grid::new(w, h, 3.0).unwrap();
        for idx in g.cells() {
            prop_assert_eq!(g.world_to_cell(g.cell_center(idx).unwrap()).unwrap(), idx);
        }
    }

    #[test]
    fn line_of_sight_is_symmetric(seed in 0u64..50, ax in 0.0f64..24.0, ay in 0.0f64..18.0, bx in 0.0f64..24.0, by in 0.0f64..18.0) {
        let map = sample_walls_map(seed);
        let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
        prop_assert_eq!(line_of_sight(a, b, &map), line_of_sight(b, a, &map));
    }

    #[test]
    fn rays_never_exceed_range(x in 0.5f64..23.5, y in 0.5f64..17.5, heading in 0.0f64..6.3, range in 0.5f64..30.0) {
        let map = sample_walls_map(3);
        let pose = Pose::new(Point::new(x, y), heading);
        for d in cast_rays(&pose, range, 220f64.to_radians(), 33, &map) {
            prop_assert!((0.0..=range).contains(&d));
        }
    }
}
