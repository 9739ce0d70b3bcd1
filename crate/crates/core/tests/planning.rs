mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use restrack::adversary::{
    attack_greedy, attack_optimal, attack_optimal_with, attack_random, attack_rate, ExactAttack,
};
use restrack::geometry::World;
use restrack::objective::{CoverageObjective, FnObjective};
use restrack::planner::{
    plan_bruteforce_maxmin, plan_greedy, plan_random, plan_resilient, resilient_call_budget,
    BruteForce,
};
use restrack::{PartitionMatroid, TrajectoryId, TrajectorySet};

use common::*;

fn world(seed: u64) -> World {
    small_world(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resilient_plan_is_a_basis_with_bounded_calls(seed in any::<u64>(), a in 0usize..6) {
        let w = world(seed);
        let matroid = w.matroid();
        let alpha = a.min(matroid.num_robots());
        let f = CoverageObjective::new(&w.targets, &w.rects());
        let plan = plan_resilient(&matroid, &f, alpha).unwrap();
        prop_assert!(matroid.is_basis(&plan.selected));
        prop_assert!(plan.oracle_calls <= resilient_call_budget(matroid.ground_set().len()));
        let trace = plan.trace.unwrap();
        prop_assert_eq!(trace.bait.len(), alpha);
        prop_assert!(trace.bait.is_disjoint(&trace.greedy_fill));
        prop_assert_eq!(trace.bait.union(&trace.greedy_fill), plan.selected);
        prop_assert_eq!(trace.scanned_bait.len(), matroid.ground_set().len());
    }

    #[test]
    fn bait_holds_the_largest_singletons(seed in any::<u64>(), a in 1usize..5) {
        let w = world(seed);
        let matroid = w.matroid();
        let alpha = a.min(matroid.num_robots());
        let masks = cover_masks(&w);
        let f = CoverageObjective::new(&w.targets, &w.rects());
        let bait = plan_resilient(&matroid, &f, alpha).unwrap().trace.unwrap().bait;
        // Reference: walk singletons by (value desc, id asc), one per robot.
        let mut order: Vec<usize> = (0..masks.len()).collect();
        order.sort_by(|&x, &y| value(&masks, &[y]).total_cmp(&value(&masks, &[x])).then(x.cmp(&y)));
        let owner: BTreeMap<usize, usize> = blocks(&w)
            .iter()
            .enumerate()
            .flat_map(|(r, b)| b.iter().map(move |&t| (t, r)))
            .collect();
        let mut expected = Vec::new();
        let mut used = Vec::new();
        for t in order {
            if expected.len() < alpha && !used.contains(&owner[&t]) {
                used.push(owner[&t]);
                expected.push(t);
            }
        }
        expected.sort();
        prop_assert_eq!(ids(&bait), expected);
    }

    #[test]
    fn attack_orderings_and_exactness(seed in any::<u64>(), a in 0usize..6) {
        let w = world(seed);
        let matroid = w.matroid();
        let alpha = a.min(matroid.num_robots());
        let masks = cover_masks(&w);
        let f = CoverageObjective::new(&w.targets, &w.rects());
        let set = plan_greedy(&matroid, &f).unwrap().selected;
        let optimal = attack_optimal(&f, &set, alpha).unwrap();
        let full = attack_optimal_with(&f, &set, alpha, &ExactAttack { full_range: true, ..ExactAttack::default() }).unwrap();
        prop_assert_eq!(optimal.surviving_value, worst_attack(&masks, &ids(&set), alpha));
        prop_assert_eq!(optimal.surviving_value, full.surviving_value);
        prop_assert!(optimal.surviving_value <= attack_greedy(&f, &set, alpha).unwrap().surviving_value);
        prop_assert!(optimal.surviving_value <= attack_random(&f, &set, alpha, seed).unwrap().surviving_value);
        if let Ok(rate) = attack_rate(&f, &set, alpha) {
            prop_assert!((0.0..=1.0).contains(&rate));
        }
    }
}

#[test]
fn bruteforce_matches_reference_max_min() {
    let mut checked = 0;
    for seed in 0..100 {
        let w = world(seed);
        let matroid = w.matroid();
        let masks = cover_masks(&w);
        let f = CoverageObjective::new(&w.targets, &w.rects());
        for alpha in 0..=matroid.num_robots() {
            let b = plan_bruteforce_maxmin(&matroid, &f, alpha, &BruteForce::default()).unwrap();
            assert_eq!(
                b.optimal_value,
                max_min(&masks, &blocks(&w), alpha),
                "seed {seed} alpha {alpha}"
            );
            assert_eq!(
                worst_attack(&masks, &ids(&b.plan.selected), alpha),
                b.optimal_value
            );
            checked += 1;
        }
    }
    assert!(checked >= 300);
}

#[test]
fn greedy_is_half_optimal_without_attacks() {
    for seed in 1000..1100 {
        let w = world(seed);
        let masks = cover_masks(&w);
        let best = all_bases(&blocks(&w))
            .iter()
            .map(|b| value(&masks, b))
            .fold(0.0, f64::max);
        let f = CoverageObjective::new(&w.targets, &w.rects());
        let g = plan_greedy(&w.matroid(), &f).unwrap();
        assert!(
            value(&masks, &ids(&g.selected)) >= 0.5 * best,
            "seed {seed}"
        );
    }
}

#[test]
fn random_plan_is_uniform_per_trajectory() {
    let matroid = PartitionMatroid::uniform_ids(&[3, 2, 4]).unwrap();
    let draws = 10_000;
    let mut counts = vec![0usize; matroid.ground_set().len()];
    for seed in 0..draws {
        for t in plan_random(&matroid, seed).selected.iter() {
            counts[t.0 as usize] += 1;
        }
    }
    let sizes = [3usize, 3, 3, 2, 2, 4, 4, 4, 4];
    for (t, (&c, &k)) in counts.iter().zip(&sizes).enumerate() {
        let p = 1.0 / k as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        let z = (c as f64 - draws as f64 * p).abs() / sd;
        assert!(z < 5.0, "trajectory {t}: {c} draws, {z:.2} sd from uniform");
    }
}

#[test]
fn single_robot_single_trajectory() {
    let matroid = PartitionMatroid::uniform_ids(&[1]).unwrap();
    let f = FnObjective(|s: &TrajectorySet| s.len() as f64);
    let only: TrajectorySet = [TrajectoryId(0)].into_iter().collect();
    assert_eq!(plan_random(&matroid, 7).selected, only);
    assert_eq!(plan_resilient(&matroid, &f, 0).unwrap().selected, only);
    assert_eq!(plan_resilient(&matroid, &f, 1).unwrap().selected, only);
    assert_eq!(plan_greedy(&matroid, &f).unwrap().selected, only);
}

#[test]
fn benchmark_scale_call_budget() {
    let arena = restrack::geometry::Rect::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [30, 45, 60] {
        let w = World::random(&mut rng, 6, m, &arena, 3.0, 7.0).unwrap();
        let f = CoverageObjective::new(&w.targets, &w.rects());
        for alpha in 0..=6 {
            let plan = plan_resilient(&w.matroid(), &f, alpha).unwrap();
            assert!(plan.oracle_calls <= 1176);
        }
    }
}
