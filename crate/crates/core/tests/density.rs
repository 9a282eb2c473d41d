mod common;

use common::*;
use crowdnav::density::{in_sensor_cone, visibility_mask, CellMask, DensityMap, LocalCrowdObservation};
use crowdnav::geometry::{line_of_sight, EnvironmentMap, Grid, Point, Pose};
use proptest::prelude::*;
use rand::Rng;

fn obs(people: Vec<Point>) -> LocalCrowdObservation {
    LocalCrowdObservation {
        cycle: 0,
        people,
        robot_pose: Pose::new(Point::new(0.0, 0.0), 0.0),
    }
}

/// Random sequence of (people, visible mask) on a grid.
fn sequence(grid: &Grid, cycles: usize, seed: u64) -> Vec<(Vec<Point>, Vec<bool>)> {
    let mut r = rng(seed);
    (0..cycles)
        .map(|_| {
            let people = (0..r.random_range(0..=90))
                .map(|_| Point::new(r.random_range(0.0..grid.width()), r.random_range(0.0..grid.height())))
                .collect();
            let visible = (0..grid.len()).map(|_| r.random_bool(0.6)).collect();
            (people, visible)
        })
        .collect()
}

#[test]
fn batch_recomputation_with_no_discount() {
    let grid = Grid::new(48.0, 36.0, 3.0).unwrap();
    for seed in 0..20 {
        let seq = sequence(&grid, 50, seed);
        let mut map = DensityMap::new(grid, 1.0).unwrap();
        let mut persons = vec![0u32; grid.len()];
        let mut seen = vec![0u32; grid.len()];
        for (people, vis) in &seq {
            map.update(&obs(people.clone()), &CellMask::from_vec(grid.rows(), grid.cols(), vis.clone()).unwrap())
                .unwrap();
            for p in people {
                let c = (p.y / 3.0).floor().min(11.0) as usize * 16 + (p.x / 3.0).floor().min(15.0) as usize;
                persons[c] += 1;
            }
            for (i, &v) in vis.iter().enumerate() {
                seen[i] += u32::from(v);
            }
        }
        for i in 0..grid.len() {
            let want = if seen[i] == 0 { 0.0 } else { f64::from(persons[i]) / f64::from(seen[i]) };
            assert!((map.densities()[i] - want).abs() < 1e-9, "seed {seed} cell {i}");
            assert_eq!(map.visits()[i], f64::from(seen[i]));
        }
    }
}

#[test]
fn discounted_counts_follow_geometric_sum() {
    let grid = Grid::new(24.0, 18.0, 3.0).unwrap();
    let alpha = 0.5;
    let seq = sequence(&grid, 50, 77);
    let mut map = DensityMap::new(grid, alpha).unwrap();
    let mut per_cycle = Vec::new();
    for (people, vis) in &seq {
        map.update(&obs(people.clone()), &CellMask::from_vec(grid.rows(), grid.cols(), vis.clone()).unwrap())
            .unwrap();
        let mut curr = vec![0.0; grid.len()];
        for p in people {
            curr[grid.id(grid.world_to_cell(*p).unwrap())] += 1.0;
        }
        per_cycle.push((curr, vis.clone()));
    }
    let n = per_cycle.len();
    for i in 0..grid.len() {
        let t: f64 = (0..n).map(|s| alpha.powi((n - 1 - s) as i32) * per_cycle[s].0[i]).sum();
        let k: f64 = (0..n).map(|s| alpha.powi((n - 1 - s) as i32) * f64::from(u8::from(per_cycle[s].1[i]))).sum();
        assert!((map.counts()[i] - t).abs() < 1e-9);
        assert!((map.visits()[i] - k).abs() < 1e-9);
    }
}

#[test]
fn visibility_mask_matches_three_conditions() {
    let map = EnvironmentMap::office();
    let grid = Grid::for_map(&map, 3.0).unwrap();
    let mut r = rng(3);
    for _ in 0..40 {
        let pose = Pose::new(
            Point::new(r.random_range(0.5..47.5), r.random_range(0.5..35.5)),
            r.random_range(0.0..std::f64::consts::TAU),
        );
        let (range, fov) = (r.random_range(5.0..30.0), r.random_range(0.5..6.3));
        let mask = visibility_mask(&pose, &map, &grid, range, fov);
        for idx in grid.cells() {
            let c = grid.cell_center(idx).unwrap();
            let off = c - pose.position;
            let bearing_err = (off.angle() - pose.heading() + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
                - std::f64::consts::PI;
            let in_cone = off.length() <= range && (off.length() == 0.0 || bearing_err.abs() <= fov / 2.0);
            assert_eq!(in_cone, in_sensor_cone(&pose, c, range, fov));
            assert_eq!(mask.get(idx), in_cone && los_oracle(pose.position, c, &map) && line_of_sight(pose.position, c, &map));
        }
    }
}

#[test]
fn small_room_fully_visible() {
    let map = EnvironmentMap::open(9.0, 6.0).unwrap();
    let grid = Grid::for_map(&map, 3.0).unwrap();
    let mask = visibility_mask(&Pose::new(Point::new(4.0, 2.5), 1.0), &map, &grid, 20.0, std::f64::consts::TAU);
    assert_eq!(mask.count(), grid.len());
}

#[test]
fn normalization_of_three_values() {
    let grid = Grid::new(9.0, 3.0, 3.0).unwrap();
    let mut map = DensityMap::new(grid, 1.0).unwrap();
    let people = [vec![Point::new(1.0, 1.0)], vec![Point::new(4.0, 1.0); 2], vec![Point::new(7.0, 1.0); 4]].concat();
    map.update(&obs(people), &CellMask::new(1, 3, true)).unwrap();
    let d = map.normalized();
    assert_eq!(d[0], 0.0);
    assert!((d[1] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(d[2], 1.0);
}

proptest! {
    #[test]
    fn arrays_stay_non_negative_and_visits_never_drop(seed in 0u64..1000, alpha in prop_oneof![Just(1.0), 0.05f64..1.0]) {
        let grid = Grid::new(18.0, 12.0, 3.0).unwrap();
        let mut map = DensityMap::new(grid, alpha).unwrap();
        let mut before = map.visits().to_vec();
        for (people, vis) in sequence(&grid, 10, seed) {
            map.update(&obs(people), &CellMask::from_vec(grid.rows(), grid.cols(), vis).unwrap()).unwrap();
            prop_assert!(map.visits().iter().chain(map.counts()).chain(map.densities()).all(|&v| v >= 0.0));
            if alpha == 1.0 {
                prop_assert!(map.visits().iter().zip(&before).all(|(a, b)| a >= b));
            }
            before = map.visits().to_vec();
        }
        let norm = map.normalized();
        prop_assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
        let (lo, hi) = map.densities().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        if hi > lo {
            prop_assert_eq!(norm.iter().copied().fold(0.0, f64::max), 1.0);
            prop_assert_eq!(norm.iter().copied().fold(1.0, f64::min), 0.0);
        }
    }

    #[test]
    fn always_visible_cells_count_updates(updates in 1usize..40) {
        let grid = Grid::new(12.0, 12.0, 3.0).unwrap();
        let mut map = DensityMap::new(grid, 1.0).unwrap();
        for _ in 0..updates {
            map.update(&obs(vec![]), &CellMask::new(4, 4, true)).unwrap();
        }
        prop_assert!(map.visits().iter().all(|&k| k == updates as f64));
    }
}
