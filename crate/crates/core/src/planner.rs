//! Trajectory selection: the attack-resilient bait-then-greedy rule and the
//! greedy, random and brute-force baselines it is compared against.
//!
//! All argmax steps break ties by the lexicographic `(robot, menu index)`
//! order of the matroid's ground set, smallest first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{attack_optimal_with, binomial, ExactAttack};
use crate::error::{Error, Result};
use crate::matroid::{PartitionMatroid, TrajectoryId, TrajectorySet, DEFAULT_ENUMERATION_CAP};
use crate::objective::{CountingOracle, Objective};

/// Bookkeeping sets of the resilient planner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmTrace {
    /// Up to `alpha` high-value trajectories meant to absorb the attack.
    pub bait: TrajectorySet,
    /// Greedy completion chosen from the remaining trajectories.
    pub greedy_fill: TrajectorySet,
    /// Everything examined while building the bait.
    pub scanned_bait: TrajectorySet,
    /// Everything examined while building the greedy completion.
    pub scanned_fill: TrajectorySet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    pub selected: TrajectorySet,
    pub trace: Option<AlgorithmTrace>,
    pub oracle_calls: u64,
}

/// Evaluation budget of the resilient planner on a ground set of size `n`.
pub fn resilient_call_budget(n: usize) -> u64 {
    let n = n as u64;
    2 * n * n + n
}

fn check_alpha(matroid: &PartitionMatroid, alpha: usize) -> Result<()> {
    if alpha > matroid.num_robots() {
        return Err(Error::Argument(format!(
            "alpha = {alpha} exceeds the number of robots ({})",
            matroid.num_robots()
        )));
    }
    Ok(())
}

fn value_of(scored: &[(TrajectoryId, f64)], id: TrajectoryId) -> f64 {
    scored
        .iter()
        .find(|(y, _)| *y == id)
        .map(|p| p.1)
        .expect("scored candidate")
}

/// First element with the largest score.
fn first_argmax(scored: impl Iterator<Item = (TrajectoryId, f64)>) -> Option<(TrajectoryId, f64)> {
    scored.fold(None, |best, (id, v)| match best {
        Some((_, b)) if v <= b => best,
        _ => Some((id, v)),
    })
}

/// Selects one trajectory per robot so that the plan keeps its value when up
/// to `alpha` of its trajectories are removed.
///
/// Phase one scans the ground set by decreasing singleton value and keeps up
/// to `alpha` trajectories, at most one per robot, as a bait set. Singleton
/// values are computed once and the scan is a sorted pass. Phase two greedily
/// completes the bait to a basis using marginal gains relative to the greedy
/// part only.
pub fn plan_resilient<O: Objective + ?Sized>(
    matroid: &PartitionMatroid,
    oracle: &O,
    alpha: usize,
) -> Result<PlanResult> {
    check_alpha(matroid, alpha)?;
    let oracle = CountingOracle::new(oracle);
    let ground = matroid.ground_set();

    let mut singles = ground
        .iter()
        .map(|&y| Ok((y, oracle.evaluate(&TrajectorySet::from_iter([y]))?)))
        .collect::<Result<Vec<_>>>()?;
    // Stable: equal values keep ground-set (lexicographic) order.
    singles.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut bait = TrajectorySet::new();
    let mut scanned_bait = TrajectorySet::new();
    for &(s, _) in &singles {
        if bait.len() < alpha && matroid.can_add(&bait, s) {
            bait.insert(s);
        }
        scanned_bait.insert(s);
    }

    let mut fill = TrajectorySet::new();
    let mut scanned_fill = TrajectorySet::new();
    let mut fill_value = oracle.evaluate(&fill)?;
    let remaining = ground.len() - bait.len();
    while scanned_fill.len() < remaining {
        let mut scored = Vec::new();
        for &y in ground {
            if bait.contains(y) || scanned_fill.contains(y) {
                continue;
            }
            let v = oracle.evaluate(&fill.with(y))?;
            scored.push((y, v));
        }
        let (s, _) = first_argmax(scored.iter().map(|&(y, v)| (y, v - fill_value)))
            .expect("unscanned trajectories remain");
        if matroid.can_add(&bait.union(&fill), s) {
            fill.insert(s);
            fill_value = value_of(&scored, s);
        }
        scanned_fill.insert(s);
    }

    Ok(PlanResult {
        selected: bait.union(&fill),
        trace: Some(AlgorithmTrace {
            bait,
            greedy_fill: fill,
            scanned_bait,
            scanned_fill,
        }),
        oracle_calls: oracle.eval_count(),
    })
}

/// Matroid greedy: repeatedly add the feasible trajectory with the largest
/// marginal gain until every robot has one.
pub fn plan_greedy<O: Objective + ?Sized>(
    matroid: &PartitionMatroid,
    oracle: &O,
) -> Result<PlanResult> {
    let oracle = CountingOracle::new(oracle);
    let mut selected = TrajectorySet::new();
    let mut value = oracle.evaluate(&selected)?;
    while selected.len() < matroid.num_robots() {
        let mut scored = Vec::new();
        for &y in matroid.ground_set() {
            if matroid.can_add(&selected, y) {
                scored.push((y, oracle.evaluate(&selected.with(y))?));
            }
        }
        let (s, _) = first_argmax(scored.iter().map(|&(y, v)| (y, v - value)))
            .expect("a feasible trajectory exists until the plan is a basis");
        selected.insert(s);
        value = value_of(&scored, s);
    }
    Ok(PlanResult {
        selected,
        trace: None,
        oracle_calls: oracle.eval_count(),
    })
}

/// Independent uniform choice of one trajectory per robot.
pub fn plan_random(matroid: &PartitionMatroid, seed: u64) -> PlanResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PlanResult {
        selected: matroid.random_basis(&mut rng),
        trace: None,
        oracle_calls: 0,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BruteForce {
    /// Bound on `#bases * C(|R|, min(alpha, |R|))`.
    pub cap: u64,
    pub attack: ExactAttack,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce {
            cap: DEFAULT_ENUMERATION_CAP,
            attack: ExactAttack::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForcePlan {
    pub plan: PlanResult,
    /// Max over bases of the worst-case surviving value.
    pub optimal_value: f64,
}

/// Exact max-min plan: every basis is scored by its worst-case attack.
pub fn plan_bruteforce_maxmin<O: Objective + ?Sized>(
    matroid: &PartitionMatroid,
    oracle: &O,
    alpha: usize,
    opts: &BruteForce,
) -> Result<BruteForcePlan> {
    check_alpha(matroid, alpha)?;
    let n = matroid.num_robots();
    let work = matroid.num_bases() * binomial(n, alpha.min(n));
    if work > opts.cap as u128 {
        return Err(Error::EnumerationTooLarge {
            count: work,
            cap: opts.cap,
        });
    }
    let oracle = CountingOracle::new(oracle);
    let mut best: Option<(TrajectorySet, f64)> = None;
    for basis in matroid.enumerate_bases(opts.cap)? {
        let v = attack_optimal_with(&oracle, &basis, alpha, &opts.attack)?.surviving_value;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((basis, v));
        }
    }
    let (selected, optimal_value) = best.expect("a matroid has at least one basis");
    Ok(BruteForcePlan {
        plan: PlanResult {
            selected,
            trace: None,
            oracle_calls: oracle.eval_count(),
        },
        optimal_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Planner {
    Resilient,
    Greedy,
    Random,
    BruteForce,
}

impl Planner {
    pub fn name(self) -> &'static str {
        match self {
            Planner::Resilient => "resilient",
            Planner::Greedy => "greedy",
            Planner::Random => "random",
            Planner::BruteForce => "brute-force",
        }
    }

    /// `seed` is only consumed by the random planner.
    pub fn plan<O: Objective + ?Sized>(
        self,
        matroid: &PartitionMatroid,
        oracle: &O,
        alpha: usize,
        seed: u64,
    ) -> Result<PlanResult> {
        match self {
            Planner::Resilient => plan_resilient(matroid, oracle, alpha),
            Planner::Greedy => plan_greedy(matroid, oracle),
            Planner::Random => Ok(plan_random(matroid, seed)),
            Planner::BruteForce => {
                plan_bruteforce_maxmin(matroid, oracle, alpha, &BruteForce::default())
                    .map(|b| b.plan)
            }
        }
    }
}

impl std::str::FromStr for Planner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resilient" => Ok(Planner::Resilient),
            "greedy" => Ok(Planner::Greedy),
            "random" => Ok(Planner::Random),
            "brute-force" => Ok(Planner::BruteForce),
            other => Err(Error::Argument(format!("unknown planner `{other}`"))),
        }
    }
}
