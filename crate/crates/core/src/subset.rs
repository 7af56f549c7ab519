//! Bitmask subsets of marking indices (bit `i` is 0-based marking `i`).

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// `{0, 1, ..., k-1}`.
    pub fn full(k: usize) -> Subset {
        assert!(k <= 64);
        if k == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << k) - 1)
        }
    }

    pub fn singleton(i: usize) -> Subset {
        assert!(i < 64);
        Subset(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Subset {
        Subset(it.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset_of(self, other: Subset) -> bool {
        self.is_subset_of(other) && self != other
    }

    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    /// Nested or disjoint.
    pub fn compatible(self, other: Subset) -> bool {
        let i = self.0 & other.0;
        i == 0 || i == self.0 || i == other.0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn minus(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn with(self, i: usize) -> Subset {
        Subset(self.0 | (1u64 << i))
    }

    pub fn iter(self) -> SubsetIter {
        SubsetIter(self.0)
    }

    /// Lowest element, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// All nonempty subsets of `self` (including `self`).
    pub fn nonempty_subsets(self) -> impl Iterator<Item = Subset> {
        let m = self.0;
        let mut s = m;
        let mut done = m == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = s;
            if s == 0 {
                done = true;
                return None;
            }
            s = (s - 1) & m;
            if s == 0 {
                done = true;
            }
            Some(Subset(out))
        })
    }

    /// Applies a marking relabeling `map[old] = new`.
    pub fn relabel(self, map: &[usize]) -> Subset {
        Subset::from_indices(self.iter().map(|i| map[i]))
    }

    /// 1-based marking labels, as used in the JSON formats.
    pub fn to_labels(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    pub fn from_labels(labels: &[usize]) -> Option<Subset> {
        if labels.iter().any(|&l| l == 0 || l > 64) {
            return None;
        }
        Some(Subset::from_indices(labels.iter().map(|&l| l - 1)))
    }
}

pub struct SubsetIter(u64);

impl Iterator for SubsetIter {
    type Item = usize;
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_and_compat() {
        let s = Subset::from_indices([0, 2]);
        assert_eq!(s.nonempty_subsets().count(), 3);
        assert_eq!(Subset::full(4).nonempty_subsets().count(), 15);
        assert_eq!(Subset::EMPTY.nonempty_subsets().count(), 0);
        assert!(Subset::from_indices([0, 1]).compatible(Subset::from_indices([0, 1, 2])));
        assert!(Subset::from_indices([0, 1]).compatible(Subset::from_indices([2, 3])));
        assert!(!Subset::from_indices([0, 1]).compatible(Subset::from_indices([1, 2])));
        assert_eq!(format!("{:?}", s), "{1,3}");
        assert_eq!(Subset::from_labels(&[1, 3]), Some(s));
    }
}
