//! Planar world model: robots, their four motion primitives, and the
//! axis-aligned rectangles their cameras sweep while flying them.
//!
//! A robot with a square field of view of side `l_o` flies a distance `l_f`
//! along one of four headings. The swept region is a `l_t x l_o` rectangle
//! with `l_t = l_f + l_o`; the start-pose field of view forms its trailing end.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{PartitionMatroid, RobotId, TrajectoryId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Closed axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        if r.is_valid() {
            Ok(r)
        } else {
            Err(Error::Argument(format!("malformed rectangle {r:?}")))
        }
    }

    /// Square of side `side` centered on `c`.
    pub fn square(c: Point2, side: f64) -> Self {
        let h = side / 2.0;
        Rect {
            x_min: c.x - h,
            x_max: c.x + h,
            y_min: c.y - h,
            y_max: c.y + h,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min <= self.x_max
            && self.y_min <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point2) -> bool {
        contains(self, p)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x_min <= other.x_min
            && other.x_max <= self.x_max
            && self.y_min <= other.y_min
            && other.y_max <= self.y_max
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        rect_intersection(self, other)
    }
}

/// Closed point-in-rectangle test: the boundary counts as covered.
pub fn contains(rect: &Rect, p: Point2) -> bool {
    rect.x_min <= p.x && p.x <= rect.x_max && rect.y_min <= p.y && p.y <= rect.y_max
}

/// Intersection of two closed rectangles. Rectangles that touch along an
/// edge intersect in a degenerate (zero-area) rectangle.
pub fn rect_intersection(a: &Rect, b: &Rect) -> Option<Rect> {
    let r = Rect {
        x_min: a.x_min.max(b.x_min),
        x_max: a.x_max.min(b.x_max),
        y_min: a.y_min.max(b.y_min),
        y_max: a.y_max.min(b.y_max),
    };
    (r.x_min <= r.x_max && r.y_min <= r.y_max).then_some(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// +y
    Forward,
    /// -y
    Backward,
    /// -x
    Left,
    /// +x
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Forward,
        Direction::Backward,
        Direction::Left,
        Direction::Right,
    ];

    /// Unit heading vector.
    pub fn unit(self) -> (f64, f64) {
        match self {
            Direction::Forward => (0.0, 1.0),
            Direction::Backward => (0.0, -1.0),
            Direction::Left => (-1.0, 0.0),
            Direction::Right => (1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub robot_id: RobotId,
    pub position: Point2,
    /// Side of the square field of view (`l_o`).
    pub fov_side: f64,
    /// Distance flown per round (`l_f`).
    pub fly_length: f64,
}

impl RobotSpec {
    pub fn new(
        robot_id: RobotId,
        position: Point2,
        fov_side: f64,
        fly_length: f64,
    ) -> Result<Self> {
        let r = RobotSpec {
            robot_id,
            position,
            fov_side,
            fly_length,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::Argument(format!(
                "robot {} has a non-finite position",
                self.robot_id
            )));
        }
        if !(self.fov_side > 0.0 && self.fov_side.is_finite()) {
            return Err(Error::Argument(format!(
                "robot {}: fov side must be positive, got {}",
                self.robot_id, self.fov_side
            )));
        }
        if !(self.fly_length >= 0.0 && self.fly_length.is_finite()) {
            return Err(Error::Argument(format!(
                "robot {}: fly length must be non-negative, got {}",
                self.robot_id, self.fly_length
            )));
        }
        Ok(())
    }

    /// Tracking length `l_t = l_f + l_o`.
    pub fn track_length(&self) -> f64 {
        self.fly_length + self.fov_side
    }

    pub fn field_of_view(&self) -> Rect {
        Rect::square(self.position, self.fov_side)
    }

    /// Ground position after flying `l_f` along `direction`.
    pub fn advanced(&self, direction: Direction) -> Point2 {
        let (dx, dy) = direction.unit();
        Point2::new(
            self.position.x + dx * self.fly_length,
            self.position.y + dy * self.fly_length,
        )
    }
}

/// Region swept by the robot's field of view when flying `direction`.
pub fn coverage_rect(robot: &RobotSpec, direction: Direction) -> Rect {
    let fov = robot.field_of_view();
    let d = robot.fly_length;
    match direction {
        Direction::Forward => Rect {
            y_max: fov.y_max + d,
            ..fov
        },
        Direction::Backward => Rect {
            y_min: fov.y_min - d,
            ..fov
        },
        Direction::Left => Rect {
            x_min: fov.x_min - d,
            ..fov
        },
        Direction::Right => Rect {
            x_max: fov.x_max + d,
            ..fov
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub trajectory_id: TrajectoryId,
    pub robot_id: RobotId,
    pub direction: Direction,
}

/// Robots with their trajectory menus, plus the targets in the arena.
///
/// Trajectory ids are assigned densely in robot-major order, so id order is
/// the lexicographic `(robot, menu index)` order used for tie-breaking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub robots: Vec<RobotSpec>,
    /// Direction menu per robot, parallel to `robots`.
    pub menus: Vec<Vec<Direction>>,
    pub targets: Vec<Point2>,
}

impl World {
    /// Every robot gets all four directions.
    pub fn new(robots: Vec<RobotSpec>, targets: Vec<Point2>) -> Result<Self> {
        let menus = vec![Direction::ALL.to_vec(); robots.len()];
        World::with_menus(robots, menus, targets)
    }

    pub fn with_menus(
        robots: Vec<RobotSpec>,
        menus: Vec<Vec<Direction>>,
        targets: Vec<Point2>,
    ) -> Result<Self> {
        if robots.len() != menus.len() {
            return Err(Error::Argument(format!(
                "{} robots but {} trajectory menus",
                robots.len(),
                menus.len()
            )));
        }
        for (robot, menu) in robots.iter().zip(&menus) {
            robot.validate()?;
            if menu.is_empty() {
                return Err(Error::Argument(format!(
                    "robot {} has an empty trajectory menu",
                    robot.robot_id
                )));
            }
            let mut sorted = menu.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != menu.len() {
                return Err(Error::Argument(format!(
                    "robot {} lists a direction twice",
                    robot.robot_id
                )));
            }
        }
        let mut ids: Vec<_> = robots.iter().map(|r| r.robot_id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != robots.len() {
            return Err(Error::Argument("duplicate robot ids".into()));
        }
        if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
            return Err(Error::Argument(format!("non-finite target {t:?}")));
        }
        Ok(World {
            robots,
            menus,
            targets,
        })
    }

    /// Samples robots and targets uniformly in `arena`, with full menus.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        num_robots: usize,
        num_targets: usize,
        arena: &Rect,
        fov_side: f64,
        fly_length: f64,
    ) -> Result<Self> {
        let robots = (0..num_robots)
            .map(|i| {
                RobotSpec::new(
                    RobotId(i as u32),
                    sample_point(rng, arena),
                    fov_side,
                    fly_length,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let targets = (0..num_targets).map(|_| sample_point(rng, arena)).collect();
        World::new(robots, targets)
    }

    pub fn trajectories(&self) -> Vec<Trajectory> {
        let mut out = Vec::new();
        for (robot, menu) in self.robots.iter().zip(&self.menus) {
            for &direction in menu {
                out.push(Trajectory {
                    trajectory_id: TrajectoryId(out.len() as u32),
                    robot_id: robot.robot_id,
                    direction,
                });
            }
        }
        out
    }

    pub fn matroid(&self) -> PartitionMatroid {
        let mut blocks = BTreeMap::new();
        for t in self.trajectories() {
            blocks
                .entry(t.robot_id)
                .or_insert_with(Vec::new)
                .push(t.trajectory_id);
        }
        PartitionMatroid::new(blocks).expect("world menus form a valid partition")
    }

    pub fn rects(&self) -> BTreeMap<TrajectoryId, Rect> {
        let by_id: BTreeMap<_, _> = self.robots.iter().map(|r| (r.robot_id, r)).collect();
        self.trajectories()
            .into_iter()
            .map(|t| {
                (
                    t.trajectory_id,
                    coverage_rect(by_id[&t.robot_id], t.direction),
                )
            })
            .collect()
    }
}

pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, arena: &Rect) -> Point2 {
    Point2::new(
        arena.x_min + rng.random::<f64>() * arena.width(),
        arena.y_min + rng.random::<f64>() * arena.height(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot(x: f64, y: f64, l_o: f64, l_f: f64) -> RobotSpec {
        RobotSpec::new(RobotId(0), Point2::new(x, y), l_o, l_f).unwrap()
    }

    #[test]
    fn forward_rect_matches_hand_arithmetic() {
        let r = coverage_rect(&robot(5.0, 5.0, 3.0, 7.0), Direction::Forward);
        assert_eq!(r, Rect::new(3.5, 6.5, 3.5, 13.5).unwrap());
    }

    #[test]
    fn left_rect_mirrors_forward() {
        let r = coverage_rect(&robot(5.0, 5.0, 3.0, 7.0), Direction::Left);
        assert_eq!(r, Rect::new(-3.5, 6.5, 3.5, 6.5).unwrap());
    }

    #[test]
    fn zero_fly_length_degenerates_to_fov() {
        let rb = robot(0.0, 0.0, 2.0, 0.0);
        for d in Direction::ALL {
            assert_eq!(
                coverage_rect(&rb, d),
                Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap()
            );
        }
    }

    #[test]
    fn rect_area_fov_and_reflection_invariants() {
        let rb = robot(2.5, -1.0, 3.0, 4.5);
        let fov = rb.field_of_view();
        for d in Direction::ALL {
            let r = coverage_rect(&rb, d);
            assert!((r.area() - rb.track_length() * rb.fov_side).abs() < 1e-12);
            assert!(r.contains_rect(&fov));
        }
        let (p, f, b) = (
            rb.position,
            coverage_rect(&rb, Direction::Forward),
            coverage_rect(&rb, Direction::Backward),
        );
        assert_eq!(f.x_min, b.x_min);
        assert!((f.y_max - p.y - (p.y - b.y_min)).abs() < 1e-12);
        assert!((f.y_min - p.y - (p.y - b.y_max)).abs() < 1e-12);
        let (l, r) = (
            coverage_rect(&rb, Direction::Left),
            coverage_rect(&rb, Direction::Right),
        );
        assert_eq!(l.y_min, r.y_min);
        assert!((r.x_max - p.x - (p.x - l.x_min)).abs() < 1e-12);
    }

    #[test]
    fn closed_containment() {
        let r = Rect::new(3.5, 6.5, 3.5, 13.5).unwrap();
        assert!(contains(&r, Point2::new(4.0, 10.0)));
        assert!(!contains(&r, Point2::new(7.0, 4.0)));
        let unit = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(contains(&unit, Point2::new(1.0, 1.0)));
    }

    #[test]
    fn intersections() {
        let a = Rect::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let b = Rect::new(1.0, 3.0, 1.0, 3.0).unwrap();
        assert_eq!(
            rect_intersection(&a, &b),
            Some(Rect::new(1.0, 2.0, 1.0, 2.0).unwrap())
        );
        let c = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let d = Rect::new(2.0, 3.0, 2.0, 3.0).unwrap();
        assert_eq!(rect_intersection(&c, &d), None);
        assert_eq!(rect_intersection(&a, &a), Some(a));
    }

    #[test]
    fn rejects_bad_robots_and_rects() {
        assert!(RobotSpec::new(RobotId(0), Point2::new(0.0, 0.0), 0.0, 1.0).is_err());
        assert!(RobotSpec::new(RobotId(0), Point2::new(0.0, 0.0), 1.0, -1.0).is_err());
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn world_ids_are_robot_major() {
        let robots = vec![
            robot(0.0, 0.0, 1.0, 1.0),
            RobotSpec {
                robot_id: RobotId(1),
                ..robot(3.0, 3.0, 1.0, 1.0)
            },
        ];
        let w = World::new(robots, vec![]).unwrap();
        let ts = w.trajectories();
        assert_eq!(ts.len(), 8);
        assert!(ts[..4].iter().all(|t| t.robot_id == RobotId(0)));
        assert_eq!(ts[5].trajectory_id, TrajectoryId(5));
        assert_eq!(ts[5].direction, Direction::Backward);
        assert_eq!(w.matroid().num_robots(), 2);
        assert_eq!(w.rects().len(), 8);
    }
}
