//! Constrained curvature, the cardinality factor `h(n, alpha)`, and a
//! verifier for the approximation guarantee of the resilient planner:
//!
//! ```text
//! f(S \ A*(S)) >= max(1 - nu, h(|R|, alpha)) / 2 * f*
//! h(n, alpha)   = max(1 / (1 + alpha), 1 / (n - alpha))
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::attack_optimal;
use crate::error::{Error, Result};
use crate::matroid::{PartitionMatroid, TrajectoryId, TrajectorySet, DEFAULT_ENUMERATION_CAP};
use crate::objective::Objective;
use crate::planner::{plan_bruteforce_maxmin, plan_resilient, BruteForce};

/// Slack allowed when asserting the approximation bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMode {
    Exact,
    /// Minimum over random bases only; a lower bound on the true curvature.
    SampledLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub value: f64,
    pub witness_set: TrajectorySet,
    pub witness_element: TrajectoryId,
    pub mode: CurvatureMode,
    /// Elements with zero singleton value, left out of the minimum.
    pub skipped_zero_elements: Vec<TrajectoryId>,
}

#[derive(Debug, Clone, Copy)]
pub enum CurvatureSearch {
    Exact { cap: u64 },
    Sampled { budget: usize, seed: u64 },
}

impl Default for CurvatureSearch {
    fn default() -> Self {
        CurvatureSearch::Exact {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// `1 - min_{B basis} min_{s in B} (f(B) - f(B - s)) / f({s})`.
pub fn constrained_curvature<O: Objective + ?Sized>(
    matroid: &PartitionMatroid,
    oracle: &O,
    search: CurvatureSearch,
) -> Result<CurvatureReport> {
    let singles = matroid
        .ground_set()
        .iter()
        .map(|&s| Ok((s, oracle.evaluate(&TrajectorySet::from_iter([s]))?)))
        .collect::<Result<std::collections::HashMap<_, _>>>()?;
    let skipped: Vec<_> = matroid
        .ground_set()
        .iter()
        .copied()
        .filter(|s| singles[s] == 0.0)
        .collect();
    if skipped.len() == matroid.ground_set().len() {
        return Err(Error::DegenerateObjective);
    }

    let mut best: Option<(f64, TrajectorySet, TrajectoryId)> = None;
    let mut visit = |basis: TrajectorySet| -> Result<()> {
        if basis.iter().all(|s| singles[&s] == 0.0) {
            return Ok(());
        }
        let full = oracle.evaluate(&basis)?;
        for s in basis.iter() {
            let single = singles[&s];
            if single == 0.0 {
                continue;
            }
            let ratio = (full - oracle.evaluate(&basis.without(s))?) / single;
            if best.as_ref().is_none_or(|(b, _, _)| ratio < *b) {
                best = Some((ratio, basis.clone(), s));
            }
        }
        Ok(())
    };

    let mode = match search {
        CurvatureSearch::Exact { cap } => {
            for basis in matroid.enumerate_bases(cap)? {
                visit(basis)?;
            }
            CurvatureMode::Exact
        }
        CurvatureSearch::Sampled { budget, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                visit(matroid.random_basis(&mut rng))?;
            }
            CurvatureMode::SampledLowerBound
        }
    };

    // A sample may miss every element with a non-zero singleton value.
    let (ratio, witness_set, witness_element) = best.ok_or(Error::DegenerateObjective)?;
    Ok(CurvatureReport {
        value: 1.0 - ratio,
        witness_set,
        witness_element,
        mode,
        skipped_zero_elements: skipped,
    })
}

/// Denominator `d` of `h(n, alpha) = 1 / d`, i.e. `min(1 + alpha, n - alpha)`.
pub fn h_bound_denominator(n: usize, alpha: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Argument("h(n, alpha) needs n >= 1".into()));
    }
    if alpha >= n {
        return Err(Error::Argument(format!(
            "h(n, alpha) is undefined for alpha = {alpha} >= n = {n}"
        )));
    }
    Ok((1 + alpha).min(n - alpha))
}

/// `max(1 / (1 + alpha), 1 / (n - alpha))` for `0 <= alpha <= n - 1`.
pub fn h_bound(n: usize, alpha: usize) -> Result<f64> {
    h_bound_denominator(n, alpha).map(|d| 1.0 / d as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub alpha: usize,
    pub num_robots: usize,
    pub selected: TrajectorySet,
    /// `f(S \ A*(S))` for the resilient plan.
    pub attacked_value: f64,
    /// Max-min optimum `f*`.
    pub optimal_value: f64,
    /// `None` when `f* = 0` (curvature not needed) or all singletons are zero.
    pub curvature: Option<f64>,
    /// `None` when `alpha = |R|`.
    pub h: Option<f64>,
    /// `max(1 - nu, h) / 2`; zero in the degenerate case.
    pub factor: f64,
    /// `f* = 0`: the ratio is undefined and only `f(S \ A*) >= 0` is asserted.
    pub degenerate: bool,
    pub holds: bool,
}

/// Runs the resilient planner, the exact attack, the brute-force optimum and
/// the exact curvature, then asserts the approximation inequality.
pub fn check_theorem1_bound<O: Objective + ?Sized>(
    matroid: &PartitionMatroid,
    oracle: &O,
    alpha: usize,
) -> Result<BoundReport> {
    let n = matroid.num_robots();
    let plan = plan_resilient(matroid, oracle, alpha)?;
    let attacked_value = attack_optimal(oracle, &plan.selected, alpha)?.surviving_value;
    let optimal_value =
        plan_bruteforce_maxmin(matroid, oracle, alpha, &BruteForce::default())?.optimal_value;

    let mut report = BoundReport {
        alpha,
        num_robots: n,
        selected: plan.selected,
        attacked_value,
        optimal_value,
        curvature: None,
        h: h_bound(n, alpha).ok(),
        factor: 0.0,
        degenerate: optimal_value == 0.0,
        holds: false,
    };
    if report.degenerate {
        report.holds = attacked_value >= 0.0;
        return Ok(report);
    }
    let nu = constrained_curvature(matroid, oracle, CurvatureSearch::default())?.value;
    report.curvature = Some(nu);
    report.factor = (1.0 - nu).max(report.h.unwrap_or(0.0)) / 2.0;
    report.holds = attacked_value >= report.factor * optimal_value - BOUND_TOLERANCE;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnObjective;

    fn cover_fn(cover: Vec<Vec<u32>>) -> impl Objective {
        FnObjective(move |s: &TrajectorySet| {
            let mut seen: Vec<u32> = s
                .iter()
                .flat_map(|id| cover[id.0 as usize].clone())
                .collect();
            seen.sort();
            seen.dedup();
            seen.len() as f64
        })
    }

    #[test]
    fn disjoint_coverage_has_zero_curvature() {
        let m = PartitionMatroid::uniform_ids(&[2, 2]).unwrap();
        let f = cover_fn(vec![vec![0], vec![1, 2], vec![3], vec![4, 5, 6]]);
        let r = constrained_curvature(&m, &f, CurvatureSearch::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.mode, CurvatureMode::Exact);
    }

    #[test]
    fn duplicated_robot_has_unit_curvature() {
        let m = PartitionMatroid::uniform_ids(&[2, 2]).unwrap();
        let f = cover_fn(vec![vec![0, 1], vec![2], vec![0, 1], vec![2]]);
        let r = constrained_curvature(&m, &f, CurvatureSearch::default()).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(
            r.witness_set,
            [0, 2].map(TrajectoryId).into_iter().collect()
        );
    }

    #[test]
    fn zero_singletons_are_skipped_and_reported() {
        let m = PartitionMatroid::uniform_ids(&[2, 1]).unwrap();
        let f = cover_fn(vec![vec![], vec![1], vec![2]]);
        let r = constrained_curvature(&m, &f, CurvatureSearch::default()).unwrap();
        assert_eq!(r.skipped_zero_elements, vec![TrajectoryId(0)]);
        assert_eq!(r.value, 0.0);
        let zero = cover_fn(vec![vec![], vec![], vec![]]);
        assert!(matches!(
            constrained_curvature(&m, &zero, CurvatureSearch::default()),
            Err(Error::DegenerateObjective)
        ));
    }

    #[test]
    fn sampled_mode_never_exceeds_exact() {
        let m = PartitionMatroid::uniform_ids(&[3, 3, 2]).unwrap();
        let f = cover_fn(vec![
            vec![0, 1],
            vec![1, 2, 3],
            vec![4],
            vec![0, 4],
            vec![2],
            vec![5, 6],
            vec![1, 6],
            vec![3, 7],
        ]);
        let exact = constrained_curvature(&m, &f, CurvatureSearch::default()).unwrap();
        for seed in 0..20 {
            let s = constrained_curvature(&m, &f, CurvatureSearch::Sampled { budget: 3, seed })
                .unwrap();
            assert_eq!(s.mode, CurvatureMode::SampledLowerBound);
            assert!(s.value <= exact.value);
        }
    }

    #[test]
    fn h_bound_facts() {
        for n in 1..=20 {
            assert_eq!(h_bound(n, 0).unwrap(), 1.0);
            assert_eq!(h_bound(n, n - 1).unwrap(), 1.0);
        }
        assert_eq!(h_bound(10, 9).unwrap(), 1.0);
        assert_eq!(h_bound(10, 5).unwrap(), 1.0 / 5.0);
        assert_eq!(h_bound(10, 4).unwrap(), 1.0 / 5.0);
        assert!(h_bound(4, 4).is_err());
        assert!(h_bound(0, 0).is_err());
    }

    #[test]
    fn bound_check_alpha_zero_and_full() {
        let m = PartitionMatroid::uniform_ids(&[2, 2, 2]).unwrap();
        let f = cover_fn(vec![
            vec![0, 1],
            vec![2],
            vec![1, 3],
            vec![4],
            vec![0],
            vec![5, 6],
        ]);
        let r0 = check_theorem1_bound(&m, &f, 0).unwrap();
        assert!(r0.holds);
        assert_eq!(r0.h, Some(1.0));
        assert_eq!(r0.factor, 0.5);
        let r3 = check_theorem1_bound(&m, &f, 3).unwrap();
        assert!(r3.degenerate && r3.holds);
        assert_eq!(r3.h, None);
        assert_eq!(r3.optimal_value, 0.0);
    }
}
