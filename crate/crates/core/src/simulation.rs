//! Multi-round tracking simulation.
//!
//! Targets follow a single-integrator model `p(k+1) = p(k) + v(k)` inside a
//! rectangular arena (reflecting at the walls). Every round all targets are
//! measured with isotropic Gaussian noise, and each target keeps a per-axis
//! Kalman filter whose prediction uses a finite-difference velocity estimate
//! from the last two raw measurements. Round duration is one time unit.
//!
//! Each configured planner controls its own fleet, started from the same
//! positions. All fleets share one target world (motion and measurement
//! noise do not depend on the robots), so every planner sees identical
//! targets and beliefs.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::adversary::Attacker;
use crate::error::{Error, Result};
use crate::geometry::{sample_point, Point2, Rect, RobotSpec, World};
use crate::matroid::{RobotId, TrajectorySet};
use crate::objective::{CoverageObjective, ExpectedDetections, GaussianTargetBelief, Objective};
use crate::planner::Planner;
use crate::seeding::stream;

/// Floor applied to posterior variances so beliefs stay proper when the
/// measurement noise is zero.
pub const MIN_VARIANCE: f64 = 1e-12;

const WORLD_STREAM: u64 = 1;
const PLANNER_STREAM: u64 = 2;
const ATTACKER_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub num_robots: usize,
    pub num_targets: usize,
    pub alpha: usize,
    /// Field-of-view side `l_o`.
    pub fov_side: f64,
    /// Fly length `l_f`; the tracking length is `l_f + l_o`.
    pub fly_length: f64,
    pub arena: Rect,
    pub rounds: usize,
    /// Measurement noise standard deviation.
    pub measurement_std: f64,
    /// Process noise variance added per axis at each prediction.
    pub process_noise: f64,
    pub initial_variance: f64,
    /// Magnitude of the initial target velocity, per round.
    pub target_speed: f64,
    /// Std of the Gaussian kick added to target velocities each round.
    pub velocity_perturbation_std: f64,
    /// The fields below are set from the experiment spec, not from the
    /// `[multi_round]` table.
    #[serde(skip)]
    pub planners: Vec<Planner>,
    #[serde(skip)]
    pub attackers: Vec<Attacker>,
    #[serde(skip)]
    pub rng_seed: u64,
    /// Record planner wall time; off keeps the record stream reproducible.
    #[serde(skip)]
    pub record_wall_time: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_robots: 4,
            num_targets: 30,
            alpha: 2,
            fov_side: 3.0,
            fly_length: 3.0,
            arena: Rect {
                x_min: 0.0,
                x_max: 10.0,
                y_min: 0.0,
                y_max: 10.0,
            },
            rounds: 50,
            measurement_std: 0.1,
            process_noise: 0.01,
            initial_variance: 1.0,
            target_speed: 0.3,
            velocity_perturbation_std: 0.0,
            planners: vec![
                Planner::Resilient,
                Planner::Greedy,
                Planner::Random,
                Planner::BruteForce,
            ],
            attackers: vec![Attacker::Optimal],
            rng_seed: 0,
            record_wall_time: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::usage(
                    name,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::usage(
                    name,
                    format!("must be non-negative and finite, got {v}"),
                ))
            }
        };
        if self.num_robots == 0 {
            return Err(Error::usage("num_robots", "must be at least 1"));
        }
        if self.alpha > self.num_robots {
            return Err(Error::usage(
                "alpha",
                format!("{} exceeds num_robots = {}", self.alpha, self.num_robots),
            ));
        }
        if self.rounds == 0 {
            return Err(Error::usage("rounds", "must be at least 1"));
        }
        positive("fov_side", self.fov_side)?;
        positive("fly_length", self.fly_length)?;
        positive("initial_variance", self.initial_variance)?;
        non_negative("measurement_std", self.measurement_std)?;
        non_negative("process_noise", self.process_noise)?;
        non_negative("target_speed", self.target_speed)?;
        non_negative("velocity_perturbation_std", self.velocity_perturbation_std)?;
        if !(self.arena.is_valid() && self.arena.area() > 0.0) {
            return Err(Error::usage("arena", "must have positive extent"));
        }
        if self.planners.is_empty() {
            return Err(Error::usage("planners", "at least one planner is required"));
        }
        if self.attackers.is_empty() {
            return Err(Error::usage(
                "attackers",
                "at least one attacker is required",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetTrack {
    pub target_id: u32,
    pub true_position: Point2,
    /// Per round.
    pub true_velocity: Point2,
    pub estimate_mean: Point2,
    pub estimate_var_x: f64,
    pub estimate_var_y: f64,
    pub velocity_estimate: Point2,
    /// Up to two most recent `(round, measurement)` pairs, oldest first.
    pub last_two_measurements: Vec<(u64, Point2)>,
}

impl TargetTrack {
    /// Track initialized from a first measurement `z` taken at round `k`.
    pub fn new(
        target_id: u32,
        position: Point2,
        velocity: Point2,
        z: Point2,
        k: u64,
        variance: f64,
    ) -> Self {
        TargetTrack {
            target_id,
            true_position: position,
            true_velocity: velocity,
            estimate_mean: z,
            estimate_var_x: variance,
            estimate_var_y: variance,
            velocity_estimate: Point2::new(0.0, 0.0),
            last_two_measurements: vec![(k, z)],
        }
    }

    pub fn belief(&self) -> GaussianTargetBelief {
        GaussianTargetBelief {
            target_id: self.target_id,
            mean: self.estimate_mean,
            std_x: self.estimate_var_x.max(MIN_VARIANCE).sqrt(),
            std_y: self.estimate_var_y.max(MIN_VARIANCE).sqrt(),
        }
    }
}

/// Reflects `x` into `[lo, hi]`, flipping `v` once per wall bounce.
fn reflect(x: &mut f64, v: &mut f64, lo: f64, hi: f64) {
    let width = hi - lo;
    if width <= 0.0 {
        *x = lo;
        return;
    }
    let period = 2.0 * width;
    let mut u = (*x - lo).rem_euclid(period);
    let bounces = ((*x - lo) / width).floor();
    if u > width {
        u = period - u;
    }
    *x = lo + u;
    if bounces.rem_euclid(2.0) != 0.0 {
        *v = -*v;
    }
}

/// Advances every target one round: optional velocity kick, integrator
/// step, then reflection at the arena walls.
pub fn step_targets<R: Rng + ?Sized>(tracks: &mut [TargetTrack], config: &SimConfig, rng: &mut R) {
    let kick = (config.velocity_perturbation_std > 0.0)
        .then(|| Normal::new(0.0, config.velocity_perturbation_std).expect("finite std"));
    let a = &config.arena;
    for t in tracks.iter_mut() {
        if let Some(kick) = &kick {
            t.true_velocity.x += kick.sample(rng);
            t.true_velocity.y += kick.sample(rng);
        }
        let mut p = Point2::new(
            t.true_position.x + t.true_velocity.x,
            t.true_position.y + t.true_velocity.y,
        );
        reflect(&mut p.x, &mut t.true_velocity.x, a.x_min, a.x_max);
        reflect(&mut p.y, &mut t.true_velocity.y, a.y_min, a.y_max);
        t.true_position = p;
    }
}

/// Noisy position measurement of every target.
pub fn measure<R: Rng + ?Sized>(
    tracks: &[TargetTrack],
    measurement_std: f64,
    rng: &mut R,
) -> Vec<Point2> {
    if measurement_std == 0.0 {
        return tracks.iter().map(|t| t.true_position).collect();
    }
    let noise = Normal::new(0.0, measurement_std).expect("finite std");
    tracks
        .iter()
        .map(|t| {
            Point2::new(
                t.true_position.x + noise.sample(rng),
                t.true_position.y + noise.sample(rng),
            )
        })
        .collect()
}

fn scalar_update(mean: &mut f64, var: &mut f64, z: f64, noise_var: f64) {
    let gain = *var / (*var + noise_var);
    *mean += gain * (z - *mean);
    *var = ((1.0 - gain) * *var).max(MIN_VARIANCE);
}

/// Predict with the current velocity estimate, correct with `z` (identity
/// observation, noise `measurement_std^2` per axis), then refresh the velocity
/// estimate from the last two raw measurements.
pub fn kalman_update(track: &mut TargetTrack, z: Point2, k: u64, config: &SimConfig) {
    let noise_var = config.measurement_std * config.measurement_std;
    track.estimate_mean.x += track.velocity_estimate.x;
    track.estimate_mean.y += track.velocity_estimate.y;
    track.estimate_var_x += config.process_noise;
    track.estimate_var_y += config.process_noise;
    scalar_update(
        &mut track.estimate_mean.x,
        &mut track.estimate_var_x,
        z.x,
        noise_var,
    );
    scalar_update(
        &mut track.estimate_mean.y,
        &mut track.estimate_var_y,
        z.y,
        noise_var,
    );

    track.last_two_measurements.push((k, z));
    if track.last_two_measurements.len() > 2 {
        track.last_two_measurements.remove(0);
    }
    if let [(k0, z0), (k1, z1)] = track.last_two_measurements[..] {
        let dt = k1.saturating_sub(k0) as f64;
        if dt > 0.0 {
            track.velocity_estimate = Point2::new((z1.x - z0.x) / dt, (z1.y - z0.y) / dt);
        }
    }
}

/// One row of the multi-round record stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub planner: Planner,
    pub attacker: Attacker,
    pub alpha: usize,
    pub num_targets: usize,
    /// Expected detections of the full plan under the current beliefs.
    pub f_full: f64,
    /// Expected detections after the attack.
    pub f_attacked: f64,
    /// `(f_full - f_attacked) / f_full`; `None` when `f_full = 0`.
    pub attack_rate: Option<f64>,
    /// Ground-truth target counts inside the plan's (surviving) coverage.
    pub true_full: f64,
    pub true_attacked: f64,
    pub oracle_calls: u64,
    pub wall_time_micros: u64,
    pub selected: TrajectorySet,
    pub removed: TrajectorySet,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    tracks: Vec<TargetTrack>,
    /// One fleet of robot positions per configured planner.
    fleets: Vec<Vec<Point2>>,
    world_rng: ChaCha8Rng,
    round: usize,
}

impl Simulation {
    /// Robots and targets placed uniformly in the arena; target headings
    /// uniform with magnitude `target_speed`.
    pub fn random(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(stream(config.rng_seed, &[WORLD_STREAM]));
        let robots: Vec<_> = (0..config.num_robots)
            .map(|_| sample_point(&mut rng, &config.arena))
            .collect();
        let targets: Vec<_> = (0..config.num_targets)
            .map(|_| {
                let p = sample_point(&mut rng, &config.arena);
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                let v = Point2::new(
                    config.target_speed * theta.cos(),
                    config.target_speed * theta.sin(),
                );
                (p, v)
            })
            .collect();
        Self::from_parts(config, robots, targets, rng)
    }

    /// Explicit initial robot positions and `(position, velocity)` targets.
    pub fn new(
        config: SimConfig,
        robots: Vec<Point2>,
        targets: Vec<(Point2, Point2)>,
    ) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(stream(config.rng_seed, &[WORLD_STREAM]));
        Self::from_parts(config, robots, targets, rng)
    }

    fn from_parts(
        config: SimConfig,
        robots: Vec<Point2>,
        targets: Vec<(Point2, Point2)>,
        mut rng: ChaCha8Rng,
    ) -> Result<Self> {
        if robots.len() != config.num_robots || targets.len() != config.num_targets {
            return Err(Error::Configuration(format!(
                "expected {} robots and {} targets, got {} and {}",
                config.num_robots,
                config.num_targets,
                robots.len(),
                targets.len()
            )));
        }
        let mut tracks: Vec<_> = targets
            .iter()
            .enumerate()
            .map(|(j, &(p, v))| TargetTrack::new(j as u32, p, v, p, 0, config.initial_variance))
            .collect();
        let first = measure(&tracks, config.measurement_std, &mut rng);
        for (t, z) in tracks.iter_mut().zip(first) {
            t.estimate_mean = z;
            t.last_two_measurements = vec![(0, z)];
        }
        let fleets = vec![robots; config.planners.len()];
        Ok(Simulation {
            config,
            tracks,
            fleets,
            world_rng: rng,
            round: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn tracks(&self) -> &[TargetTrack] {
        &self.tracks
    }

    pub fn fleet(&self, planner_index: usize) -> &[Point2] {
        &self.fleets[planner_index]
    }

    fn world_for(&self, fleet: &[Point2]) -> Result<World> {
        let robots = fleet
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                RobotSpec::new(
                    RobotId(i as u32),
                    p,
                    self.config.fov_side,
                    self.config.fly_length,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        World::new(
            robots,
            self.tracks.iter().map(|t| t.true_position).collect(),
        )
    }

    /// Plans, attacks and scores every (planner, attacker) pair for the
    /// current round, moves the fleets, then advances the targets and filters.
    pub fn step(&mut self) -> Result<Vec<RoundRecord>> {
        let cfg = &self.config;
        let k = self.round;
        let beliefs: Vec<_> = self.tracks.iter().map(TargetTrack::belief).collect();
        let mut records = Vec::new();
        let mut moved = Vec::with_capacity(self.fleets.len());

        for (pi, &planner) in cfg.planners.iter().enumerate() {
            let world = self.world_for(&self.fleets[pi])?;
            let rects = world.rects();
            let matroid = world.matroid();
            let objective = ExpectedDetections::new(&beliefs, &rects);
            let truth = CoverageObjective::new(&world.targets, &rects);

            let plan_seed = stream(cfg.rng_seed, &[PLANNER_STREAM, pi as u64, k as u64]);
            let started = Instant::now();
            let plan = planner.plan(&matroid, &objective, cfg.alpha, plan_seed)?;
            let wall = if cfg.record_wall_time {
                started.elapsed().as_micros() as u64
            } else {
                0
            };
            let f_full = objective.evaluate(&plan.selected)?;
            let true_full = truth.evaluate(&plan.selected)?;

            for (ai, &attacker) in cfg.attackers.iter().enumerate() {
                let attack_seed = stream(
                    cfg.rng_seed,
                    &[ATTACKER_STREAM, pi as u64, ai as u64, k as u64],
                );
                let attack = attacker.attack(&objective, &plan.selected, cfg.alpha, attack_seed)?;
                let surviving = plan.selected.difference(&attack.removed);
                records.push(RoundRecord {
                    round: k,
                    planner,
                    attacker,
                    alpha: cfg.alpha,
                    num_targets: cfg.num_targets,
                    f_full,
                    f_attacked: attack.surviving_value,
                    attack_rate: (f_full > 0.0).then(|| (f_full - attack.surviving_value) / f_full),
                    true_full,
                    true_attacked: truth.evaluate(&surviving)?,
                    oracle_calls: plan.oracle_calls,
                    wall_time_micros: wall,
                    selected: plan.selected.clone(),
                    removed: attack.removed,
                });
            }

            // Attacked robots lose their camera for the round but still fly.
            let trajectories = world.trajectories();
            let next: Vec<Point2> = world
                .robots
                .iter()
                .map(|robot| {
                    let t = trajectories
                        .iter()
                        .find(|t| {
                            t.robot_id == robot.robot_id && plan.selected.contains(t.trajectory_id)
                        })
                        .expect("plans are bases");
                    clamp_to(robot.advanced(t.direction), &cfg.arena)
                })
                .collect();
            moved.push(next);
        }
        self.fleets = moved;

        step_targets(&mut self.tracks, &self.config, &mut self.world_rng);
        let zs = measure(
            &self.tracks,
            self.config.measurement_std,
            &mut self.world_rng,
        );
        let stamp = (k + 1) as u64;
        for (t, z) in self.tracks.iter_mut().zip(zs) {
            kalman_update(t, z, stamp, &self.config);
        }
        self.round += 1;
        Ok(records)
    }

    pub fn run(mut self) -> Result<Vec<RoundRecord>> {
        let mut out = Vec::new();
        for _ in 0..self.config.rounds {
            out.extend(self.step()?);
        }
        Ok(out)
    }
}

/// Robots stay over the arena: a flight that would leave it stops at the wall.
fn clamp_to(p: Point2, arena: &Rect) -> Point2 {
    Point2::new(
        p.x.clamp(arena.x_min, arena.x_max),
        p.y.clamp(arena.y_min, arena.y_max),
    )
}

/// Runs a full simulation from a random initial world.
pub fn run_rounds(config: &SimConfig) -> Result<Vec<RoundRecord>> {
    Simulation::random(config.clone())?.run()
}
