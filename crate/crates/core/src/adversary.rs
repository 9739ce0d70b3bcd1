//! Attacks that remove up to `alpha` trajectories from a selected plan.

use itertools::Itertools;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{TrajectorySet, DEFAULT_ENUMERATION_CAP};
use crate::objective::Objective;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackResult {
    pub removed: TrajectorySet,
    /// `f(S \ A)`.
    pub surviving_value: f64,
}

/// Search options for the exact attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactAttack {
    /// Also enumerate removals smaller than `min(alpha, |S|)`. For monotone
    /// objectives this never finds a lower value; kept for cross-checking.
    pub full_range: bool,
    pub cap: u64,
}

impl Default for ExactAttack {
    fn default() -> Self {
        ExactAttack {
            full_range: false,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Worst-case removal with the default search options.
pub fn attack_optimal<O: Objective + ?Sized>(
    oracle: &O,
    set: &TrajectorySet,
    alpha: usize,
) -> Result<AttackResult> {
    attack_optimal_with(oracle, set, alpha, &ExactAttack::default())
}

/// Exhaustive `argmin_{A ⊆ S, |A| <= alpha} f(S \ A)`. Candidates are
/// visited by size, then lexicographically; the first minimum wins.
pub fn attack_optimal_with<O: Objective + ?Sized>(
    oracle: &O,
    set: &TrajectorySet,
    alpha: usize,
    opts: &ExactAttack,
) -> Result<AttackResult> {
    let k = alpha.min(set.len());
    let sizes = if opts.full_range { 0..=k } else { k..=k };
    let count: u128 = sizes.clone().map(|j| binomial(set.len(), j)).sum();
    if count > opts.cap as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: opts.cap,
        });
    }
    let mut best: Option<AttackResult> = None;
    for size in sizes {
        for removed in set.iter().combinations(size) {
            let removed: TrajectorySet = removed.into_iter().collect();
            let value = oracle.evaluate(&set.difference(&removed))?;
            if best.as_ref().is_none_or(|b| value < b.surviving_value) {
                best = Some(AttackResult {
                    removed,
                    surviving_value: value,
                });
            }
        }
    }
    Ok(best.expect("at least one candidate removal"))
}

/// Removes, one at a time, the element whose loss hurts most.
pub fn attack_greedy<O: Objective + ?Sized>(
    oracle: &O,
    set: &TrajectorySet,
    alpha: usize,
) -> Result<AttackResult> {
    let mut current = set.clone();
    let mut removed = TrajectorySet::new();
    if alpha == 0 || set.is_empty() {
        let surviving_value = oracle.evaluate(set)?;
        return Ok(AttackResult {
            removed,
            surviving_value,
        });
    }
    let mut surviving_value = f64::INFINITY;
    for _ in 0..alpha.min(set.len()) {
        // max damage f(cur) - f(cur - a) == min f(cur - a)
        let mut pick = None;
        for a in current.iter() {
            let v = oracle.evaluate(&current.without(a))?;
            if pick.is_none_or(|(_, best)| v < best) {
                pick = Some((a, v));
            }
        }
        let (a, v) = pick.expect("non-empty current set");
        current.remove(a);
        removed.insert(a);
        surviving_value = v;
    }
    Ok(AttackResult {
        removed,
        surviving_value,
    })
}

/// Removes `min(alpha, |S|)` elements chosen uniformly without replacement.
pub fn attack_random<O: Objective + ?Sized>(
    oracle: &O,
    set: &TrajectorySet,
    alpha: usize,
    seed: u64,
) -> Result<AttackResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = alpha.min(set.len());
    let members = set.as_slice();
    let removed: TrajectorySet = index::sample(&mut rng, members.len(), k)
        .into_iter()
        .map(|i| members[i])
        .collect();
    let surviving_value = oracle.evaluate(&set.difference(&removed))?;
    Ok(AttackResult {
        removed,
        surviving_value,
    })
}

/// Relative loss `(f(S) - f(S \ A*)) / f(S)` under the worst-case attack.
pub fn attack_rate<O: Objective + ?Sized>(
    oracle: &O,
    set: &TrajectorySet,
    alpha: usize,
) -> Result<f64> {
    let full = oracle.evaluate(set)?;
    if full <= 0.0 {
        return Err(Error::UndefinedRate);
    }
    let worst = attack_optimal(oracle, set, alpha)?;
    Ok((full - worst.surviving_value) / full)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attacker {
    Optimal,
    Greedy,
    Random,
    None,
}

impl Attacker {
    pub fn name(self) -> &'static str {
        match self {
            Attacker::Optimal => "optimal",
            Attacker::Greedy => "greedy",
            Attacker::Random => "random",
            Attacker::None => "none",
        }
    }

    /// `seed` is only consumed by the random attacker.
    pub fn attack<O: Objective + ?Sized>(
        self,
        oracle: &O,
        set: &TrajectorySet,
        alpha: usize,
        seed: u64,
    ) -> Result<AttackResult> {
        match self {
            Attacker::Optimal => attack_optimal(oracle, set, alpha),
            Attacker::Greedy => attack_greedy(oracle, set, alpha),
            Attacker::Random => attack_random(oracle, set, alpha, seed),
            Attacker::None => Ok(AttackResult {
                removed: TrajectorySet::new(),
                surviving_value: oracle.evaluate(set)?,
            }),
        }
    }
}

impl std::str::FromStr for Attacker {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Attacker::Optimal),
            "greedy" => Ok(Attacker::Greedy),
            "random" => Ok(Attacker::Random),
            "none" => Ok(Attacker::None),
            other => Err(Error::Argument(format!("unknown attacker `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::TrajectoryId;
    use crate::objective::FnObjective;

    fn ids(v: &[u32]) -> TrajectorySet {
        v.iter().map(|&i| TrajectoryId(i)).collect()
    }

    /// Additive objective with weight `w[i]` per element.
    fn modular(w: Vec<f64>) -> impl Objective {
        FnObjective(move |s: &TrajectorySet| s.iter().map(|id| w[id.0 as usize]).sum())
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(6, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!((0..=3).map(|k| binomial(6, k)).sum::<u128>(), 42);
    }

    #[test]
    fn alpha_zero_removes_nothing() {
        let f = modular(vec![1.0, 2.0, 3.0]);
        let s = ids(&[0, 1, 2]);
        for r in [
            attack_optimal(&f, &s, 0).unwrap(),
            attack_greedy(&f, &s, 0).unwrap(),
            attack_random(&f, &s, 0, 4).unwrap(),
        ] {
            assert!(r.removed.is_empty());
            assert_eq!(r.surviving_value, 6.0);
        }
    }

    #[test]
    fn alpha_at_least_size_leaves_zero() {
        let f = modular(vec![1.0, 2.0, 3.0]);
        let s = ids(&[0, 2]);
        assert_eq!(attack_optimal(&f, &s, 2).unwrap().surviving_value, 0.0);
        assert_eq!(attack_optimal(&f, &s, 5).unwrap().removed, s);
        assert_eq!(attack_greedy(&f, &s, 5).unwrap().surviving_value, 0.0);
        assert_eq!(attack_rate(&f, &s, 3).unwrap(), 1.0);
    }

    #[test]
    fn modular_greedy_is_exact() {
        let f = modular(vec![4.0, 1.0, 3.0, 3.0, 0.5]);
        let s = ids(&[0, 1, 2, 3, 4]);
        for a in 0..=5 {
            let g = attack_greedy(&f, &s, a).unwrap();
            let o = attack_optimal(&f, &s, a).unwrap();
            assert_eq!(g.surviving_value, o.surviving_value);
        }
    }

    #[test]
    fn lexicographic_ties() {
        let f = modular(vec![1.0, 1.0, 1.0]);
        let s = ids(&[0, 1, 2]);
        assert_eq!(attack_optimal(&f, &s, 1).unwrap().removed, ids(&[0]));
        assert_eq!(attack_greedy(&f, &s, 2).unwrap().removed, ids(&[0, 1]));
    }

    #[test]
    fn random_attack_is_seeded() {
        let f = modular(vec![1.0; 10]);
        let s = ids(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let a = attack_random(&f, &s, 3, 99).unwrap();
        assert_eq!(a, attack_random(&f, &s, 3, 99).unwrap());
        assert_eq!(a.removed.len(), 3);
        assert!(a.removed.is_subset(&s));
    }

    #[test]
    fn zero_value_rate_is_undefined() {
        let f = modular(vec![0.0, 0.0]);
        assert!(matches!(
            attack_rate(&f, &ids(&[0, 1]), 1),
            Err(Error::UndefinedRate)
        ));
    }

    #[test]
    fn rate_endpoints() {
        let f = modular(vec![5.0, 0.0, 0.0]);
        assert_eq!(attack_rate(&f, &ids(&[0, 1, 2]), 0).unwrap(), 0.0);
        assert_eq!(attack_rate(&f, &ids(&[0, 1, 2]), 2).unwrap(), 1.0);
    }

    #[test]
    fn cap_is_enforced() {
        let f = modular(vec![1.0; 10]);
        let s: TrajectorySet = (0..10).map(TrajectoryId).collect();
        let opts = ExactAttack {
            full_range: false,
            cap: 100,
        };
        assert!(matches!(
            attack_optimal_with(&f, &s, 5, &opts),
            Err(Error::EnumerationTooLarge {
                count: 252,
                cap: 100
            })
        ));
    }

    #[test]
    fn attacker_names_round_trip() {
        for a in [
            Attacker::Optimal,
            Attacker::Greedy,
            Attacker::Random,
            Attacker::None,
        ] {
            assert_eq!(a.name().parse::<Attacker>().unwrap(), a);
        }
    }
}
