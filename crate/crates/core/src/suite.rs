//! Built-in verification suites behind `restrack check`.
//!
//! `bounds` runs the approximation-bound check on random small worlds, the
//! curvature endpoint instances and the `h(n, alpha)` facts. `properties`
//! samples monotonicity and submodularity for both objectives, with negative
//! controls that must be caught.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    check_theorem1_bound, constrained_curvature, h_bound_denominator, CurvatureSearch,
};
use crate::error::{Error, Result};
use crate::geometry::{Direction, Point2, Rect, RobotSpec, World};
use crate::matroid::{RobotId, TrajectorySet};
use crate::objective::{
    check_monotone, check_submodular, CoverageObjective, ExpectedDetections, FnObjective,
    GaussianTargetBelief,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bounds,
    Properties,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(Suite::Bounds),
            "properties" => Ok(Suite::Properties),
            other => Err(Error::Argument(format!(
                "unknown suite `{other}` (expected `bounds` or `properties`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn line(name: &str, passed: bool, detail: impl Into<String>) -> CheckLine {
    CheckLine {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// A world with 2 to 5 robots, 2 or 3 random directions per robot and at
/// most 15 targets, in the `[0, 10]^2` arena.
pub fn random_small_world<R: Rng + ?Sized>(rng: &mut R) -> World {
    let arena = Rect {
        x_min: 0.0,
        x_max: 10.0,
        y_min: 0.0,
        y_max: 10.0,
    };
    let n = rng.random_range(2..=5);
    let robots: Vec<_> = (0..n)
        .map(|i| {
            let p = crate::geometry::sample_point(rng, &arena);
            RobotSpec::new(RobotId(i as u32), p, 3.0, 7.0).expect("positive sizes")
        })
        .collect();
    let menus = (0..n)
        .map(|_| {
            let k = rng.random_range(2..=3);
            let mut picks: Vec<_> = index::sample(rng, 4, k)
                .into_iter()
                .map(|i| Direction::ALL[i])
                .collect();
            picks.sort();
            picks
        })
        .collect();
    let m = rng.random_range(1..=15);
    let targets = (0..m)
        .map(|_| crate::geometry::sample_point(rng, &arena))
        .collect();
    World::with_menus(robots, menus, targets).expect("valid random world")
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckLine>> {
    match suite {
        Suite::Bounds => bounds_suite(seed),
        Suite::Properties => properties_suite(seed),
    }
}

fn bounds_suite(seed: u64) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut violations, mut degenerate) = (0, 0, 0);
    let mut worst = f64::INFINITY;
    while checked < 200 {
        let world = random_small_world(&mut rng);
        let matroid = world.matroid();
        let f = CoverageObjective::new(&world.targets, &world.rects());
        let alpha = rng.random_range(0..matroid.num_robots());
        let report = match check_theorem1_bound(&matroid, &f, alpha) {
            Ok(r) => r,
            // Every singleton zero: no curvature; resample.
            Err(Error::DegenerateObjective) => continue,
            Err(e) => return Err(e),
        };
        checked += 1;
        if report.degenerate {
            degenerate += 1;
        } else {
            worst = worst.min(report.attacked_value - report.factor * report.optimal_value);
        }
        if !report.holds {
            violations += 1;
        }
    }
    out.push(line(
        "approximation bound",
        violations == 0,
        format!("{checked} instances, {violations} violations, {degenerate} with f* = 0, min slack {worst:.3}"),
    ));

    let endpoints = curvature_endpoints()?;
    out.push(line(
        "curvature endpoints",
        endpoints == (0.0, 1.0),
        format!("disjoint = {}, duplicated = {}", endpoints.0, endpoints.1),
    ));

    let h_one = (1..=20).all(|n| h_bound_denominator(n, 0).ok() == Some(1));
    out.push(line("h(n, 0) = 1", h_one, "n = 1..20"));
    let mut min_ok = true;
    for n in (2..=20).step_by(2) {
        let d = (0..n)
            .map(|a| h_bound_denominator(n, a))
            .collect::<Result<Vec<_>>>()?;
        min_ok &= d.iter().max() == Some(&(n / 2)) && d[n / 2] == n / 2;
    }
    out.push(line(
        "min over alpha of h = 2/n",
        min_ok,
        "even n = 2..20, attained at alpha = n/2",
    ));
    Ok(out)
}

/// Curvature of a disjoint-coverage world and of a world where two robots
/// see exactly the same targets.
pub fn curvature_endpoints() -> Result<(f64, f64)> {
    let robot = |i: u32, x: f64, y: f64| RobotSpec::new(RobotId(i), Point2::new(x, y), 2.0, 2.0);
    let menu = vec![vec![Direction::Forward]; 2];
    let disjoint = World::with_menus(
        vec![robot(0, 1.0, 1.0)?, robot(1, 8.0, 1.0)?],
        menu.clone(),
        vec![
            Point2::new(1.0, 3.0),
            Point2::new(8.0, 3.0),
            Point2::new(8.2, 3.5),
        ],
    )?;
    let duplicated = World::with_menus(
        vec![robot(0, 1.0, 1.0)?, robot(1, 1.0, 1.0)?],
        menu,
        vec![Point2::new(1.0, 3.0), Point2::new(1.5, 2.5)],
    )?;
    let nu = |w: &World| -> Result<f64> {
        let f = CoverageObjective::new(&w.targets, &w.rects());
        Ok(constrained_curvature(&w.matroid(), &f, CurvatureSearch::default())?.value)
    };
    Ok((nu(&disjoint)?, nu(&duplicated)?))
}

fn properties_suite(seed: u64) -> Result<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arena = Rect {
        x_min: 0.0,
        x_max: 10.0,
        y_min: 0.0,
        y_max: 10.0,
    };
    let world = World::random(&mut rng, 4, 15, &arena, 3.0, 3.0)?;
    let matroid = world.matroid();
    let rects = world.rects();
    let coverage = CoverageObjective::new(&world.targets, &rects);
    let beliefs: Vec<_> = world
        .targets
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let sx = rng.random_range(0.2..1.5);
            let sy = rng.random_range(0.2..1.5);
            GaussianTargetBelief::new(i as u32, p, sx, sy)
        })
        .collect::<Result<_>>()?;
    let detections = ExpectedDetections::new(&beliefs, &rects);

    let mut out = Vec::new();
    let trials = 1000;
    let mut record = |name: &str, violations: usize, expect_clean: bool| {
        let passed = if expect_clean {
            violations == 0
        } else {
            violations > 0
        };
        out.push(line(
            name,
            passed,
            format!("{violations} violations in {trials} samples"),
        ));
    };
    record(
        "coverage monotone",
        check_monotone(&coverage, &matroid, trials, seed)?
            .violations
            .len(),
        true,
    );
    record(
        "coverage submodular",
        check_submodular(&coverage, &matroid, trials, seed)?
            .violations
            .len(),
        true,
    );
    record(
        "expected detections monotone",
        check_monotone(&detections, &matroid, trials, seed)?
            .violations
            .len(),
        true,
    );
    record(
        "expected detections submodular",
        check_submodular(&detections, &matroid, trials, seed)?
            .violations
            .len(),
        true,
    );
    let negative = FnObjective(|s: &TrajectorySet| -(s.len() as f64));
    record(
        "control -|S| is caught",
        check_monotone(&negative, &matroid, trials, seed)?
            .violations
            .len(),
        false,
    );
    let square = FnObjective(|s: &TrajectorySet| (s.len() * s.len()) as f64);
    record(
        "control |S|^2 is caught",
        check_submodular(&square, &matroid, trials, seed)?
            .violations
            .len(),
        false,
    );
    Ok(out)
}
