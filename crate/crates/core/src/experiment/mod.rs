//! Experiment harness: one-round comparisons on random static worlds and
//! multi-round runs of the tracking simulator, both emitting [`RecordRow`]s.
//!
//! Experiments are described by a TOML file:
//!
//! ```toml
//! protocol = "one-step"          # or "multi-round"
//! seed = 2024
//! trials = 30
//! planners = ["resilient", "greedy", "random", "brute-force"]
//! attackers = ["optimal", "greedy", "random"]
//!
//! [one_step]
//! num_robots = 6
//! m_min = 30
//! m_max = 60
//! alphas = [3, 4]
//! ```
//!
//! A `multi-round` spec carries a `[multi_round]` table with the simulator
//! fields of [`SimConfig`] instead.

pub mod records;
pub mod summary;

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::Attacker;
use crate::error::{Error, Result};
use crate::geometry::{Rect, World};
use crate::objective::{CoverageObjective, Objective};
use crate::planner::Planner;
use crate::seeding::{stream, trial_seed};
use crate::simulation::{run_rounds, SimConfig};

pub use records::{
    read_csv_file, read_rows, write_csv_file, write_rows, RecordRow, HEADER, SCHEMA_VERSION,
};
pub use summary::{summarize_rows, Stats, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    OneStep,
    MultiRound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OneStepParams {
    pub num_robots: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub alphas: Vec<usize>,
    pub fov_side: f64,
    pub fly_length: f64,
    pub arena: Rect,
}

impl Default for OneStepParams {
    fn default() -> Self {
        OneStepParams {
            num_robots: 6,
            m_min: 30,
            m_max: 60,
            alphas: vec![3, 4],
            fov_side: 3.0,
            fly_length: 7.0,
            arena: Rect {
                x_min: 0.0,
                x_max: 10.0,
                y_min: 0.0,
                y_max: 10.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub protocol: Protocol,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub planners: Vec<Planner>,
    pub attackers: Vec<Attacker>,
    /// Default output path; the CLI's `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the wall-time column. Off by default so output is reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub one_step: Option<OneStepParams>,
    #[serde(default)]
    pub multi_round: Option<SimConfig>,
}

fn default_trials() -> usize {
    1
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::usage("trials", "must be at least 1"));
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
        match self.protocol {
            Protocol::OneStep => {
                let p = self.one_step.as_ref().ok_or_else(|| {
                    Error::usage("one_step", "required for protocol = \"one-step\"")
                })?;
                if p.num_robots == 0 {
                    return Err(Error::usage("one_step.num_robots", "must be at least 1"));
                }
                if p.m_min > p.m_max {
                    return Err(Error::usage("one_step.m_min", "must not exceed m_max"));
                }
                if p.alphas.is_empty() {
                    return Err(Error::usage(
                        "one_step.alphas",
                        "at least one alpha is required",
                    ));
                }
                if let Some(a) = p.alphas.iter().find(|&&a| a > p.num_robots) {
                    return Err(Error::usage(
                        "one_step.alphas",
                        format!("alpha = {a} exceeds num_robots = {}", p.num_robots),
                    ));
                }
                if !(p.fov_side > 0.0 && p.fov_side.is_finite()) {
                    return Err(Error::usage("one_step.fov_side", "must be positive"));
                }
                if !(p.fly_length > 0.0 && p.fly_length.is_finite()) {
                    return Err(Error::usage("one_step.fly_length", "must be positive"));
                }
                if !(p.arena.is_valid() && p.arena.area() > 0.0) {
                    return Err(Error::usage("one_step.arena", "must have positive extent"));
                }
            }
            Protocol::MultiRound => {
                let sim = self.sim_config(0)?;
                sim.validate().map_err(|e| match e {
                    Error::Usage { field, reason } => Error::Usage {
                        field: format!("multi_round.{field}"),
                        reason,
                    },
                    other => other,
                })?;
            }
        }
        Ok(())
    }

    /// Simulator configuration for multi-round trial `trial`.
    pub fn sim_config(&self, trial: u64) -> Result<SimConfig> {
        let base = self.multi_round.as_ref().ok_or_else(|| {
            Error::usage("multi_round", "required for protocol = \"multi-round\"")
        })?;
        Ok(SimConfig {
            planners: self.planners.clone(),
            attackers: self.attackers.clone(),
            rng_seed: trial_seed(self.seed, trial),
            record_wall_time: self.record_wall_time,
            ..base.clone()
        })
    }
}

const RANDOM_PLANNER_STREAM: u64 = 11;
const RANDOM_ATTACKER_STREAM: u64 = 12;

/// Seed of the static world for `(trial, m)`: shared by every alpha, planner
/// and attacker of that trial.
pub fn one_step_world_seed(master: u64, trial: u64, m: u64) -> u64 {
    stream(trial_seed(master, trial), &[m])
}

fn one_step_instance(
    spec: &ExperimentSpec,
    p: &OneStepParams,
    m: usize,
    alpha: usize,
    trial: u64,
) -> Result<Vec<RecordRow>> {
    let seed = one_step_world_seed(spec.seed, trial, m as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let world = World::random(
        &mut rng,
        p.num_robots,
        m,
        &p.arena,
        p.fov_side,
        p.fly_length,
    )?;
    let matroid = world.matroid();
    let objective = CoverageObjective::new(&world.targets, &world.rects());

    let mut rows = Vec::new();
    for (pi, &planner) in spec.planners.iter().enumerate() {
        let plan_seed = stream(seed, &[RANDOM_PLANNER_STREAM, alpha as u64, pi as u64]);
        let started = Instant::now();
        let plan = planner.plan(&matroid, &objective, alpha, plan_seed)?;
        let wall = if spec.record_wall_time {
            started.elapsed().as_micros() as u64
        } else {
            0
        };
        let f_full = objective.evaluate(&plan.selected)?;
        for (ai, &attacker) in spec.attackers.iter().enumerate() {
            let attack_seed = stream(
                seed,
                &[RANDOM_ATTACKER_STREAM, alpha as u64, pi as u64, ai as u64],
            );
            let attack = attacker.attack(&objective, &plan.selected, alpha, attack_seed)?;
            rows.push(RecordRow {
                trial,
                round: 0,
                planner: planner.name().into(),
                attacker: attacker.name().into(),
                m: m as u64,
                alpha: alpha as u64,
                objective: "coverage".into(),
                f_full,
                f_attacked: attack.surviving_value,
                attack_rate: (f_full > 0.0).then(|| (f_full - attack.surviving_value) / f_full),
                f_true_full: f_full,
                f_true_attacked: attack.surviving_value,
                oracle_calls: plan.oracle_calls,
                wall_time_micros: wall,
                seed,
            });
        }
    }
    Ok(rows)
}

/// Runs `f` on a pool of `jobs` threads (all cores when `None`).
fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// For each `m`, each alpha and each trial: sample a static world, run every
/// planner and every attacker. Rows come out ordered by `(m, alpha, trial,
/// planner, attacker)` regardless of `jobs`.
pub fn run_one_step_suite(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<Vec<RecordRow>> {
    spec.validate()?;
    if spec.protocol != Protocol::OneStep {
        return Err(Error::usage("protocol", "expected \"one-step\""));
    }
    let p = spec.one_step.as_ref().expect("validated");
    let mut units = Vec::new();
    for m in p.m_min..=p.m_max {
        for &alpha in &p.alphas {
            for trial in 0..spec.trials as u64 {
                units.push((m, alpha, trial));
            }
        }
    }
    let chunks = with_pool(jobs, || {
        units
            .par_iter()
            .map(|&(m, alpha, trial)| one_step_instance(spec, p, m, alpha, trial))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(chunks.into_iter().flatten().collect())
}

/// Runs the simulator once per trial, each trial with its own derived seed.
pub fn run_multi_round_suite(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<Vec<RecordRow>> {
    spec.validate()?;
    if spec.protocol != Protocol::MultiRound {
        return Err(Error::usage("protocol", "expected \"multi-round\""));
    }
    let chunks = with_pool(jobs, || {
        (0..spec.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let cfg = spec.sim_config(trial)?;
                let records = run_rounds(&cfg)?;
                Ok(records
                    .into_iter()
                    .map(|r| RecordRow {
                        trial,
                        round: r.round as u64,
                        planner: r.planner.name().into(),
                        attacker: r.attacker.name().into(),
                        m: r.num_targets as u64,
                        alpha: r.alpha as u64,
                        objective: "expected-detections".into(),
                        f_full: r.f_full,
                        f_attacked: r.f_attacked,
                        attack_rate: r.attack_rate,
                        f_true_full: r.true_full,
                        f_true_attacked: r.true_attacked,
                        oracle_calls: r.oracle_calls,
                        wall_time_micros: r.wall_time_micros,
                        seed: cfg.rng_seed,
                    })
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(chunks.into_iter().flatten().collect())
}

pub fn run_experiment(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<Vec<RecordRow>> {
    match spec.protocol {
        Protocol::OneStep => run_one_step_suite(spec, jobs),
        Protocol::MultiRound => run_multi_round_suite(spec, jobs),
    }
}
