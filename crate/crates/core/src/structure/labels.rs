use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A finite set of label indices below 64, stored as a bitmask.
///
/// Ordered by size, then lexicographically on the sorted index lists, so
/// `{} < {0} < {1} < {0,1} < {0,2}`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn from_bits(bits: u64) -> Self {
        LabelSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_indices(indices: impl IntoIterator<Item = u32>) -> Self {
        LabelSet(indices.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    pub fn contains(self, i: u32) -> bool {
        i < 64 && self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: LabelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: LabelSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn max_index(self) -> Option<u32> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros())
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// All subsets of `{0, ..., universe-1}` in the set order, lazily.
    pub fn enumerate(universe: u32) -> impl Iterator<Item = LabelSet> {
        (0..=universe as usize).flat_map(move |size| Combinations::new(universe as usize, size))
    }

    /// Least set in the set order that contains `must`, avoids `avoid`,
    /// and is not in `used`.
    pub fn least_unused(universe: u32, must: LabelSet, avoid: LabelSet, used: &BTreeSet<LabelSet>) -> Option<LabelSet> {
        LabelSet::enumerate(universe).find(|s| must.is_subset(*s) && s.is_disjoint(avoid) && !used.contains(s))
    }
}

impl Ord for LabelSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for LabelSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

struct Combinations {
    universe: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(universe: usize, size: usize) -> Self {
        Combinations { universe, idx: (0..size).collect(), done: size > universe }
    }
}

impl Iterator for Combinations {
    type Item = LabelSet;

    fn next(&mut self) -> Option<LabelSet> {
        if self.done {
            return None;
        }
        let out = LabelSet::from_indices(self.idx.iter().map(|&i| i as u32));
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.universe - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Label sets aligned with a structure's sorted element list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    universe: u32,
    sets: Vec<LabelSet>,
}

impl Labeling {
    pub(crate) fn new(universe: u32, sets: Vec<LabelSet>) -> Self {
        Labeling { universe, sets }
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn sets(&self) -> &[LabelSet] {
        &self.sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_size_then_lexicographic() {
        let got: Vec<Vec<u32>> = LabelSet::enumerate(3).map(|s| s.iter().collect()).collect();
        let want: Vec<Vec<u32>> =
            vec![vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]];
        assert_eq!(got, want);
        let mut sorted = got.iter().map(|v| LabelSet::from_indices(v.clone())).collect::<Vec<_>>();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, LabelSet::enumerate(3).collect::<Vec<_>>());
    }

    #[test]
    fn least_unused_respects_constraints() {
        let used: BTreeSet<_> = [LabelSet::EMPTY, LabelSet::from_indices([0])].into();
        let got = LabelSet::least_unused(4, LabelSet::EMPTY, LabelSet::EMPTY, &used).unwrap();
        assert_eq!(got, LabelSet::from_indices([1]));
        let got = LabelSet::least_unused(4, LabelSet::from_indices([0]), LabelSet::EMPTY, &used).unwrap();
        assert_eq!(got, LabelSet::from_indices([0, 1]));
        let got = LabelSet::least_unused(1, LabelSet::EMPTY, LabelSet::EMPTY, &used);
        assert_eq!(got, None);
    }

    #[test]
    fn empty_universe_has_one_set() {
        assert_eq!(LabelSet::enumerate(0).count(), 1);
        assert_eq!(LabelSet::enumerate(5).count(), 32);
    }
}
