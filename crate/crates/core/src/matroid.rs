//! Partition-matroid feasibility model: every robot follows at most one
//! trajectory from its own menu, and a full plan assigns exactly one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of sets any brute-force enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrajectoryId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl fmt::Display for TrajectoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// A duplicate-free set of trajectory ids, kept sorted so that equal sets
/// compare, hash and serialize identically.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrajectorySet(Vec<TrajectoryId>);

impl TrajectorySet {
    pub fn new() -> Self {
        TrajectorySet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: TrajectoryId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// Returns `false` if `id` was already present.
    pub fn insert(&mut self, id: TrajectoryId) -> bool {
        match self.0.binary_search(&id) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, id);
                true
            }
        }
    }

    pub fn remove(&mut self, id: TrajectoryId) -> bool {
        match self.0.binary_search(&id) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, id: TrajectoryId) -> Self {
        let mut s = self.clone();
        s.insert(id);
        s
    }

    pub fn without(&self, id: TrajectoryId) -> Self {
        let mut s = self.clone();
        s.remove(id);
        s
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = TrajectoryId> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[TrajectoryId] {
        &self.0
    }

    pub fn union(&self, other: &TrajectorySet) -> Self {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &TrajectorySet) -> Self {
        self.iter().filter(|id| !other.contains(*id)).collect()
    }

    pub fn intersection(&self, other: &TrajectorySet) -> Self {
        self.iter().filter(|id| other.contains(*id)).collect()
    }

    pub fn is_subset(&self, other: &TrajectorySet) -> bool {
        self.iter().all(|id| other.contains(id))
    }

    pub fn is_disjoint(&self, other: &TrajectorySet) -> bool {
        self.iter().all(|id| !other.contains(id))
    }
}

impl FromIterator<TrajectoryId> for TrajectorySet {
    fn from_iter<I: IntoIterator<Item = TrajectoryId>>(iter: I) -> Self {
        let mut v: Vec<_> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        TrajectorySet(v)
    }
}

impl<'a> IntoIterator for &'a TrajectorySet {
    type Item = TrajectoryId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, TrajectoryId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Display for TrajectorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    block: usize,
    rank: usize,
}

/// Ground set partitioned into per-robot blocks; independent iff at most one
/// element per block.
#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    robots: Vec<RobotId>,
    blocks: Vec<Vec<TrajectoryId>>,
    ground: Vec<TrajectoryId>,
    slots: HashMap<TrajectoryId, Slot>,
}

impl PartitionMatroid {
    /// Blocks must be non-empty and pairwise disjoint; the ground set is
    /// their union in `(robot, menu index)` order.
    pub fn new(blocks: BTreeMap<RobotId, Vec<TrajectoryId>>) -> Result<Self> {
        let mut robots = Vec::with_capacity(blocks.len());
        let mut out_blocks = Vec::with_capacity(blocks.len());
        let mut ground = Vec::new();
        let mut slots = HashMap::new();
        for (b, (robot, block)) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Argument(format!(
                    "robot {robot} has no trajectories"
                )));
            }
            for &id in &block {
                let slot = Slot {
                    block: b,
                    rank: ground.len(),
                };
                if slots.insert(id, slot).is_some() {
                    return Err(Error::Argument(format!(
                        "trajectory {id} appears in two blocks"
                    )));
                }
                ground.push(id);
            }
            robots.push(robot);
            out_blocks.push(block);
        }
        Ok(PartitionMatroid {
            robots,
            blocks: out_blocks,
            ground,
            slots,
        })
    }

    /// Matroid with `sizes[r]` trajectories for robot `r`, ids assigned densely.
    pub fn uniform_ids(sizes: &[usize]) -> Result<Self> {
        let mut next = 0u32;
        let blocks = sizes
            .iter()
            .enumerate()
            .map(|(r, &k)| {
                let ids = (0..k).map(|_| {
                    next += 1;
                    TrajectoryId(next - 1)
                });
                (RobotId(r as u32), ids.collect())
            })
            .collect();
        PartitionMatroid::new(blocks)
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robots(&self) -> &[RobotId] {
        &self.robots
    }

    /// All trajectories in lexicographic `(robot, menu index)` order.
    pub fn ground_set(&self) -> &[TrajectoryId] {
        &self.ground
    }

    pub fn ground_trajectory_set(&self) -> TrajectorySet {
        self.ground.iter().copied().collect()
    }

    /// `(robot, menu)` pairs in robot order.
    pub fn blocks(&self) -> impl Iterator<Item = (RobotId, &[TrajectoryId])> {
        self.robots
            .iter()
            .copied()
            .zip(self.blocks.iter().map(Vec::as_slice))
    }

    pub fn contains(&self, id: TrajectoryId) -> bool {
        self.slots.contains_key(&id)
    }

    pub fn robot_of(&self, id: TrajectoryId) -> Option<RobotId> {
        self.slots.get(&id).map(|s| self.robots[s.block])
    }

    /// Position of `id` in the lexicographic ground-set order.
    pub fn lex_rank(&self, id: TrajectoryId) -> Option<usize> {
        self.slots.get(&id).map(|s| s.rank)
    }

    fn block_counts(&self, s: &TrajectorySet) -> Option<Vec<usize>> {
        let mut counts = vec![0usize; self.blocks.len()];
        for id in s {
            counts[self.slots.get(&id)?.block] += 1;
        }
        Some(counts)
    }

    /// At most one trajectory per robot. Sets with ids outside the ground set
    /// are not independent.
    pub fn is_independent(&self, s: &TrajectorySet) -> bool {
        self.block_counts(s)
            .is_some_and(|c| c.iter().all(|&n| n <= 1))
    }

    /// Exactly one trajectory per robot.
    pub fn is_basis(&self, s: &TrajectorySet) -> bool {
        self.block_counts(s)
            .is_some_and(|c| c.iter().all(|&n| n == 1))
    }

    /// Whether `s + {id}` stays independent, assuming `s` already is.
    pub fn can_add(&self, s: &TrajectorySet, id: TrajectoryId) -> bool {
        let Some(slot) = self.slots.get(&id) else {
            return false;
        };
        !s.contains(id)
            && s.iter().all(|other| {
                self.slots
                    .get(&other)
                    .is_some_and(|o| o.block != slot.block)
            })
    }

    pub fn num_bases(&self) -> u128 {
        self.blocks.iter().map(|b| b.len() as u128).product()
    }

    /// Every basis exactly once, lexicographic in `(robot, menu index)`.
    pub fn enumerate_bases(&self, cap: u64) -> Result<Bases<'_>> {
        let count = self.num_bases();
        if count > cap as u128 {
            return Err(Error::EnumerationTooLarge { count, cap });
        }
        Ok(Bases {
            matroid: self,
            cursor: Some(vec![0; self.blocks.len()]),
        })
    }

    /// One uniformly random trajectory per robot.
    pub fn random_basis<R: Rng + ?Sized>(&self, rng: &mut R) -> TrajectorySet {
        self.blocks
            .iter()
            .map(|b| b[rng.random_range(0..b.len())])
            .collect()
    }
}

/// Odometer over per-robot menu indices; the last robot varies fastest.
pub struct Bases<'a> {
    matroid: &'a PartitionMatroid,
    cursor: Option<Vec<usize>>,
}

impl Iterator for Bases<'_> {
    type Item = TrajectorySet;

    fn next(&mut self) -> Option<TrajectorySet> {
        let cursor = self.cursor.as_mut()?;
        let blocks = &self.matroid.blocks;
        let out = cursor.iter().zip(blocks).map(|(&i, b)| b[i]).collect();
        let mut pos = cursor.len();
        loop {
            if pos == 0 {
                self.cursor = None;
                break;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < blocks[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(v: &[u32]) -> TrajectorySet {
        v.iter().map(|&i| TrajectoryId(i)).collect()
    }

    #[test]
    fn independence_examples() {
        let m = PartitionMatroid::uniform_ids(&[2, 2]).unwrap();
        assert!(m.is_independent(&TrajectorySet::new()));
        assert!(!m.is_independent(&ids(&[0, 1])));
        assert!(m.is_independent(&ids(&[0, 3])));
        assert!(!m.is_independent(&ids(&[9])));
    }

    #[test]
    fn basis_examples() {
        let m = PartitionMatroid::uniform_ids(&[2, 2]).unwrap();
        assert!(m.is_basis(&ids(&[1, 2])));
        assert!(!m.is_basis(&TrajectorySet::new()));
        assert!(!m.is_basis(&ids(&[1])));
    }

    #[test]
    fn enumeration_counts() {
        let m = PartitionMatroid::uniform_ids(&[2, 2]).unwrap();
        assert_eq!(
            m.enumerate_bases(DEFAULT_ENUMERATION_CAP).unwrap().count(),
            4
        );
        let m = PartitionMatroid::uniform_ids(&[4; 6]).unwrap();
        let bases: Vec<_> = m
            .enumerate_bases(DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .collect();
        assert_eq!(bases.len(), 4096);
        assert!(bases.iter().all(|b| m.is_basis(b) && b.len() == 6));
        let m = PartitionMatroid::uniform_ids(&[1]).unwrap();
        assert_eq!(
            m.enumerate_bases(1).unwrap().collect::<Vec<_>>(),
            vec![ids(&[0])]
        );
    }

    #[test]
    fn enumeration_is_lexicographic_and_unique() {
        let m = PartitionMatroid::uniform_ids(&[2, 3, 2]).unwrap();
        let bases: Vec<_> = m.enumerate_bases(100).unwrap().collect();
        assert_eq!(bases.first(), Some(&ids(&[0, 2, 5])));
        assert_eq!(bases[1], ids(&[0, 2, 6]));
        assert_eq!(bases.last(), Some(&ids(&[1, 4, 6])));
        let mut sorted = bases.clone();
        sorted.sort();
        assert_eq!(sorted, bases);
        sorted.dedup();
        assert_eq!(sorted.len(), 12);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let m = PartitionMatroid::uniform_ids(&[4; 6]).unwrap();
        assert!(matches!(
            m.enumerate_bases(4095),
            Err(Error::EnumerationTooLarge {
                count: 4096,
                cap: 4095
            })
        ));
    }

    #[test]
    fn rejects_overlapping_or_empty_blocks() {
        let mut blocks = BTreeMap::new();
        blocks.insert(RobotId(0), vec![TrajectoryId(0)]);
        blocks.insert(RobotId(1), vec![TrajectoryId(0)]);
        assert!(PartitionMatroid::new(blocks).is_err());
        let mut blocks = BTreeMap::new();
        blocks.insert(RobotId(0), vec![]);
        assert!(PartitionMatroid::new(blocks).is_err());
    }

    #[test]
    fn subsets_of_bases_are_independent() {
        let m = PartitionMatroid::uniform_ids(&[3, 2, 4, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for basis in m.enumerate_bases(1000).unwrap() {
            let sub: TrajectorySet = basis.iter().filter(|_| rng.random::<bool>()).collect();
            assert!(m.is_independent(&sub));
            if sub.len() < basis.len() {
                assert!(!m.is_basis(&sub));
            }
        }
    }

    #[test]
    fn can_add_respects_blocks() {
        let m = PartitionMatroid::uniform_ids(&[2, 2]).unwrap();
        let s = ids(&[0]);
        assert!(!m.can_add(&s, TrajectoryId(1)));
        assert!(!m.can_add(&s, TrajectoryId(0)));
        assert!(m.can_add(&s, TrajectoryId(2)));
    }

    #[test]
    fn set_algebra() {
        let a = ids(&[3, 1, 2, 1]);
        assert_eq!(
            a.as_slice(),
            &[TrajectoryId(1), TrajectoryId(2), TrajectoryId(3)]
        );
        assert_eq!(a.difference(&ids(&[2])), ids(&[1, 3]));
        assert_eq!(a.union(&ids(&[7])), ids(&[1, 2, 3, 7]));
        assert!(ids(&[1]).is_subset(&a));
        assert_eq!(a.to_string(), "{t1 t2 t3}");
    }
}
