//! Tracking objectives over trajectory sets and randomized checks of the
//! monotonicity and submodularity properties the planners rely on.
//!
//! Two objectives are provided:
//!
//! - [`CoverageObjective`]: number of (known) target positions lying inside
//!   the union of the selected coverage rectangles;
//! - [`ExpectedDetections`]: expected number of targets inside the union when
//!   each target position is an axis-aligned Gaussian belief. The union mass
//!   is computed exactly by inclusion-exclusion over rectangle intersections.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};
use crate::matroid::{PartitionMatroid, TrajectoryId, TrajectorySet};

/// Default bound on the selected-set size for inclusion-exclusion.
pub const DEFAULT_INCLUSION_EXCLUSION_CAP: usize = 20;

/// Slack used by the monotonicity and submodularity checks.
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

/// A set function over trajectories. Implementations are expected to be
/// monotone, submodular, deterministic and zero on the empty set.
pub trait Objective {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64> {
        (**self).evaluate(set)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64> {
        (**self).evaluate(set)
    }
}

/// Wraps an objective and counts every `evaluate` call. The counter is
/// atomic, so a shared oracle may be evaluated from several threads.
#[derive(Debug, Default)]
pub struct CountingOracle<O> {
    inner: O,
    count: AtomicU64,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn eval_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for CountingOracle<O> {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(set)
    }
}

/// Adapts a closure into an [`Objective`]; handy for synthetic set functions.
pub struct FnObjective<F>(pub F);

impl<F: Fn(&TrajectorySet) -> f64> Objective for FnObjective<F> {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64> {
        Ok((self.0)(set))
    }
}

/// Number of targets inside the union of the selected rectangles.
///
/// Each trajectory's covered targets are precomputed as a bitset, so an
/// evaluation is a word-wise OR and a popcount.
#[derive(Debug, Clone)]
pub struct CoverageObjective {
    num_targets: usize,
    masks: BTreeMap<TrajectoryId, Vec<u64>>,
}

impl CoverageObjective {
    pub fn new(targets: &[Point2], rects: &BTreeMap<TrajectoryId, Rect>) -> Self {
        let words = targets.len().div_ceil(64);
        let masks = rects
            .iter()
            .map(|(&id, rect)| {
                let mut mask = vec![0u64; words];
                for (j, &p) in targets.iter().enumerate() {
                    if rect.contains(p) {
                        mask[j / 64] |= 1 << (j % 64);
                    }
                }
                (id, mask)
            })
            .collect();
        CoverageObjective {
            num_targets: targets.len(),
            masks,
        }
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn count(&self, set: &TrajectorySet) -> Result<usize> {
        let mut acc = vec![0u64; self.num_targets.div_ceil(64)];
        for id in set {
            let mask = self
                .masks
                .get(&id)
                .ok_or_else(|| Error::Configuration(format!("no coverage rectangle for {id}")))?;
            for (a, m) in acc.iter_mut().zip(mask) {
                *a |= m;
            }
        }
        Ok(acc.iter().map(|w| w.count_ones() as usize).sum())
    }
}

impl Objective for CoverageObjective {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64> {
        self.count(set).map(|n| n as f64)
    }
}

/// Number of `targets` lying in the union of the rectangles of `set`.
pub fn coverage_count(
    targets: &[Point2],
    rects: &BTreeMap<TrajectoryId, Rect>,
    set: &TrajectorySet,
) -> Result<usize> {
    let chosen = set
        .iter()
        .map(|id| {
            rects
                .get(&id)
                .ok_or_else(|| Error::Configuration(format!("no coverage rectangle for {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(targets
        .iter()
        .filter(|&&p| chosen.iter().any(|r| r.contains(p)))
        .count())
}

/// Axis-aligned Gaussian estimate of a target position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTargetBelief {
    pub target_id: u32,
    pub mean: Point2,
    pub std_x: f64,
    pub std_y: f64,
}

impl GaussianTargetBelief {
    pub fn new(target_id: u32, mean: Point2, std_x: f64, std_y: f64) -> Result<Self> {
        let ok = |s: f64| s > 0.0 && s.is_finite();
        if !mean.is_finite() || !ok(std_x) || !ok(std_y) {
            return Err(Error::Argument(format!(
                "target {target_id}: belief needs a finite mean and positive stds, got {mean:?} ({std_x}, {std_y})"
            )));
        }
        Ok(GaussianTargetBelief {
            target_id,
            mean,
            std_x,
            std_y,
        })
    }

    /// Probability mass of the belief inside `rect`.
    pub fn rect_mass(&self, rect: &Rect) -> f64 {
        let c = self.cdf_bounds(rect);
        (c[1] - c[0]).max(0.0) * (c[3] - c[2]).max(0.0)
    }

    /// `[Phi_x(x_min), Phi_x(x_max), Phi_y(y_min), Phi_y(y_max)]`.
    fn cdf_bounds(&self, rect: &Rect) -> [f64; 4] {
        let zx = |v: f64| normal_cdf((v - self.mean.x) / self.std_x);
        let zy = |v: f64| normal_cdf((v - self.mean.y) / self.std_y);
        [
            zx(rect.x_min),
            zx(rect.x_max),
            zy(rect.y_min),
            zy(rect.y_max),
        ]
    }
}

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Gaussian mass of a union of rectangles by inclusion-exclusion.
///
/// `bounds` holds per-rectangle CDF values. Because the CDF is monotone, the
/// CDF values of an intersection are the max of the lower and the min of the
/// upper values, so no further CDF evaluations are needed. A branch whose
/// intersection carries no mass is pruned: every superset's intersection is
/// contained in it.
fn union_mass(bounds: &[[f64; 4]]) -> f64 {
    fn walk(bounds: &[[f64; 4]], acc: [f64; 4], sign: f64, total: &mut f64) {
        for (i, b) in bounds.iter().enumerate() {
            let next = [
                acc[0].max(b[0]),
                acc[1].min(b[1]),
                acc[2].max(b[2]),
                acc[3].min(b[3]),
            ];
            let mass = (next[1] - next[0]).max(0.0) * (next[3] - next[2]).max(0.0);
            if mass > 0.0 {
                *total += sign * mass;
                walk(&bounds[i + 1..], next, -sign, total);
            }
        }
    }
    let mut total = 0.0;
    walk(bounds, [0.0, 1.0, 0.0, 1.0], 1.0, &mut total);
    total
}

/// Expected number of detected targets under Gaussian beliefs.
#[derive(Debug, Clone)]
pub struct ExpectedDetections {
    num_targets: usize,
    cap: usize,
    /// Per trajectory, the CDF bounds of its rectangle under every belief.
    bounds: BTreeMap<TrajectoryId, Vec<[f64; 4]>>,
}

impl ExpectedDetections {
    pub fn new(beliefs: &[GaussianTargetBelief], rects: &BTreeMap<TrajectoryId, Rect>) -> Self {
        Self::with_cap(beliefs, rects, DEFAULT_INCLUSION_EXCLUSION_CAP)
    }

    pub fn with_cap(
        beliefs: &[GaussianTargetBelief],
        rects: &BTreeMap<TrajectoryId, Rect>,
        cap: usize,
    ) -> Self {
        let bounds = rects
            .iter()
            .map(|(&id, r)| (id, beliefs.iter().map(|b| b.cdf_bounds(r)).collect()))
            .collect();
        ExpectedDetections {
            num_targets: beliefs.len(),
            cap,
            bounds,
        }
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }
}

impl Objective for ExpectedDetections {
    fn evaluate(&self, set: &TrajectorySet) -> Result<f64> {
        if set.len() > self.cap {
            return Err(Error::ObjectiveTooLarge {
                size: set.len(),
                cap: self.cap,
            });
        }
        let per_rect = set
            .iter()
            .map(|id| {
                self.bounds
                    .get(&id)
                    .ok_or_else(|| Error::Configuration(format!("no coverage rectangle for {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut scratch = Vec::with_capacity(per_rect.len());
        let mut total = 0.0;
        for j in 0..self.num_targets {
            scratch.clear();
            scratch.extend(per_rect.iter().map(|b| b[j]));
            total += union_mass(&scratch);
        }
        Ok(total)
    }
}

/// Sum over beliefs of the probability of lying in the union of the
/// rectangles of `set`.
pub fn expected_detections(
    beliefs: &[GaussianTargetBelief],
    rects: &BTreeMap<TrajectoryId, Rect>,
    set: &TrajectorySet,
) -> Result<f64> {
    ExpectedDetections::new(beliefs, rects).evaluate(set)
}

/// A sampled instance where a property inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub smaller: TrajectorySet,
    pub larger: TrajectorySet,
    pub element: Option<TrajectoryId>,
    /// Left and right sides of the inequality that should hold.
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Random subset of `pool` with a uniformly drawn size in `0..=max_len`.
fn random_subset<R: Rng>(rng: &mut R, pool: &[TrajectoryId], max_len: usize) -> TrajectorySet {
    let k = rng.random_range(0..=max_len.min(pool.len()));
    index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

/// Samples nested pairs `S ⊆ S' ⊆ ground` and checks `f(S) <= f(S') + tol`.
pub fn check_monotone<O: Objective + ?Sized>(
    oracle: &O,
    matroid: &PartitionMatroid,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    check_monotone_within(oracle, matroid.ground_set(), trials, seed)
}

pub fn check_monotone_within<O: Objective + ?Sized>(
    oracle: &O,
    ground: &[TrajectoryId],
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport {
        trials,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        let larger = random_subset(&mut rng, ground, ground.len());
        let smaller = random_subset(&mut rng, larger.as_slice(), larger.len());
        let lhs = oracle.evaluate(&smaller)?;
        let rhs = oracle.evaluate(&larger)?;
        if lhs > rhs + PROPERTY_TOLERANCE {
            report.violations.push(Violation {
                smaller,
                larger,
                element: None,
                lhs,
                rhs,
            });
        }
    }
    Ok(report)
}

/// Samples triples `S ⊆ S'`, `s ∉ S'` and checks diminishing returns:
/// `f(S + s) - f(S) >= f(S' + s) - f(S') - tol`.
pub fn check_submodular<O: Objective + ?Sized>(
    oracle: &O,
    matroid: &PartitionMatroid,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    check_submodular_within(oracle, matroid.ground_set(), trials, seed)
}

pub fn check_submodular_within<O: Objective + ?Sized>(
    oracle: &O,
    ground: &[TrajectoryId],
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    if ground.is_empty() {
        return Err(Error::Argument(
            "submodularity check needs a non-empty ground set".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport {
        trials,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        let larger = random_subset(&mut rng, ground, ground.len() - 1);
        let smaller = random_subset(&mut rng, larger.as_slice(), larger.len());
        let outside: Vec<_> = ground
            .iter()
            .copied()
            .filter(|&id| !larger.contains(id))
            .collect();
        let element = outside[rng.random_range(0..outside.len())];
        let lhs = oracle.evaluate(&smaller.with(element))? - oracle.evaluate(&smaller)?;
        let rhs = oracle.evaluate(&larger.with(element))? - oracle.evaluate(&larger)?;
        if lhs < rhs - PROPERTY_TOLERANCE {
            report.violations.push(Violation {
                smaller,
                larger,
                element: Some(element),
                lhs,
                rhs,
            });
        }
    }
    Ok(report)
}
