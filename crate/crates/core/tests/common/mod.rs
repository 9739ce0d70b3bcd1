//! Reference oracles for integration tests. They recompute coverage, attacks,
//! max-min optima and curvature by plain enumeration over bitmasks, sharing
//! nothing with the library beyond the input worlds.

#![allow(dead_code)]

use rand::seq::index;
use rand::Rng;
use restrack::geometry::{Direction, Point2, RobotSpec, World};
use restrack::RobotId;

/// Covered-target bitmask per trajectory, in dense trajectory-id order.
pub fn cover_masks(world: &World) -> Vec<u64> {
    assert!(world.targets.len() <= 64);
    let mut masks = Vec::new();
    for (robot, menu) in world.robots.iter().zip(&world.menus) {
        let h = robot.fov_side / 2.0;
        let (x, y, d) = (robot.position.x, robot.position.y, robot.fly_length);
        for dir in menu {
            let (mut x0, mut x1, mut y0, mut y1) = (x - h, x + h, y - h, y + h);
            match dir {
                Direction::Forward => y1 += d,
                Direction::Backward => y0 -= d,
                Direction::Left => x0 -= d,
                Direction::Right => x1 += d,
            }
            let mut mask = 0u64;
            for (i, t) in world.targets.iter().enumerate() {
                if x0 <= t.x && t.x <= x1 && y0 <= t.y && t.y <= y1 {
                    mask |= 1 << i;
                }
            }
            masks.push(mask);
        }
    }
    masks
}

/// Trajectory-id blocks per robot, in dense id order.
pub fn blocks(world: &World) -> Vec<Vec<usize>> {
    let mut next = 0;
    world
        .menus
        .iter()
        .map(|menu| {
            let ids: Vec<usize> = (next..next + menu.len()).collect();
            next += menu.len();
            ids
        })
        .collect()
}

pub fn value(masks: &[u64], set: &[usize]) -> f64 {
    set.iter().fold(0u64, |acc, &i| acc | masks[i]).count_ones() as f64
}

pub fn all_bases(blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for block in blocks {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                block.iter().map(move |&t| {
                    let mut b = prefix.clone();
                    b.push(t);
                    b
                })
            })
            .collect();
    }
    out
}

/// Smallest value left after removing any subset of at most `alpha` elements.
pub fn worst_attack(masks: &[u64], set: &[usize], alpha: usize) -> f64 {
    let k = set.len();
    let mut worst = f64::INFINITY;
    for removed in 0u32..(1 << k) {
        if removed.count_ones() as usize > alpha {
            continue;
        }
        let kept: Vec<usize> = (0..k)
            .filter(|i| removed & (1 << i) == 0)
            .map(|i| set[i])
            .collect();
        worst = worst.min(value(masks, &kept));
    }
    worst
}

pub fn max_min(masks: &[u64], blocks: &[Vec<usize>], alpha: usize) -> f64 {
    all_bases(blocks)
        .iter()
        .map(|b| worst_attack(masks, b, alpha))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `1 - min over bases B and s in B with f({s}) > 0 of (f(B) - f(B - s)) / f({s})`.
pub fn curvature(masks: &[u64], blocks: &[Vec<usize>]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for b in all_bases(blocks) {
        let full = value(masks, &b);
        for (i, &s) in b.iter().enumerate() {
            let single = value(masks, &[s]);
            if single == 0.0 {
                continue;
            }
            let rest: Vec<usize> = b
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &t)| t)
                .collect();
            let ratio = (full - value(masks, &rest)) / single;
            best = Some(best.map_or(ratio, |v: f64| v.min(ratio)));
        }
    }
    best.map(|r| 1.0 - r)
}

/// 2 to 5 robots with 2 or 3 distinct directions each and 1 to 15 targets in
/// the `[0, 10]^2` arena.
pub fn small_world<R: Rng>(rng: &mut R) -> World {
    let n = rng.random_range(2..=5);
    let point = |rng: &mut R| Point2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
    let robots = (0..n)
        .map(|i| RobotSpec::new(RobotId(i), point(rng), 3.0, 7.0).unwrap())
        .collect();
    let menus = (0..n)
        .map(|_| {
            let k = rng.random_range(2..=3);
            let mut m: Vec<_> = index::sample(rng, 4, k)
                .into_iter()
                .map(|i| Direction::ALL[i])
                .collect();
            m.sort();
            m
        })
        .collect();
    let m = rng.random_range(1..=15);
    let targets = (0..m).map(|_| point(rng)).collect();
    World::with_menus(robots, menus, targets).unwrap()
}

pub fn ids(set: &restrack::TrajectorySet) -> Vec<usize> {
    set.iter().map(|t| t.0 as usize).collect()
}
