use std::fmt;

use crate::error::{Error, Result};

/// An ordered set of qubit labels.
///
/// Labels are zero-based (`0..32`). Within an operator supported on a set,
/// the smallest label is the most significant bit of the computational-basis
/// index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct QubitSet(u32);

impl QubitSet {
    pub const EMPTY: QubitSet = QubitSet(0);

    pub fn new(labels: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = 0u32;
        for q in labels {
            if q >= 32 {
                return Err(Error::LabelOutOfRange(q));
            }
            if mask & (1 << q) != 0 {
                return Err(Error::DuplicateLabel(q));
            }
            mask |= 1 << q;
        }
        Ok(QubitSet(mask))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        assert!(n <= 32, "at most 32 qubit labels");
        if n == 32 {
            QubitSet(u32::MAX)
        } else {
            QubitSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(q: usize) -> Self {
        assert!(q < 32, "qubit label {q} out of range");
        QubitSet(1 << q)
    }

    pub const fn from_mask(mask: u32) -> Self {
        QubitSet(mask)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, q: usize) -> bool {
        q < 32 && self.0 & (1 << q) != 0
    }

    pub const fn is_subset(self, other: QubitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_disjoint(self, other: QubitSet) -> bool {
        self.0 & other.0 == 0
    }

    pub const fn union(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 & other.0)
    }

    pub const fn difference(self, other: QubitSet) -> QubitSet {
        QubitSet(self.0 & !other.0)
    }

    /// Labels in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> + Clone {
        let mask = self.0;
        (0..32).filter(move |q| mask & (1 << q) != 0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Rank of `q` within the set, if present.
    pub fn position(self, q: usize) -> Option<usize> {
        if !self.contains(q) {
            return None;
        }
        Some((self.0 & ((1u32 << q) - 1)).count_ones() as usize)
    }

    /// All nonempty subsets of `self`, in increasing mask order.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = QubitSet> {
        let full = self.0;
        // Enumerate submasks of `full` in increasing order.
        let mut sub: u32 = 0;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            sub = sub.wrapping_sub(full) & full;
            if sub == 0 {
                done = true;
                return None;
            }
            Some(QubitSet(sub))
        })
    }
}

impl fmt::Debug for QubitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for QubitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, q) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "}}")
    }
}

/// For an operator on `support`, the bit position (counted from the least
/// significant bit) that carries qubit `q`.
pub(crate) fn bit_position(support: QubitSet, q: usize) -> usize {
    let m = support.len();
    m - 1 - support.position(q).expect("qubit in support")
}

/// Scatter table: entry `i` is the full-register index whose bits at
/// `positions` (most significant sub-index bit first) spell `i`, all other
/// bits zero.
pub(crate) fn scatter_table(positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|i| {
            positions
                .iter()
                .enumerate()
                .filter(|&(j, _)| (i >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &p)| 1usize << p)
                .sum()
        })
        .collect()
}

/// Bit positions of the labels of `sub` inside an index over `support`,
/// ordered as `sub` orders its own index (most significant first).
pub(crate) fn positions_in(support: QubitSet, sub: QubitSet) -> Vec<usize> {
    sub.iter().map(|q| bit_position(support, q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(matches!(QubitSet::new([1, 1]), Err(Error::DuplicateLabel(1))));
        assert!(matches!(QubitSet::new([40]), Err(Error::LabelOutOfRange(40))));
    }

    #[test]
    fn subsets_enumerate_all() {
        let s = QubitSet::new([0, 2, 3]).unwrap();
        let subs: Vec<_> = s.nonempty_subsets().collect();
        assert_eq!(subs.len(), 7);
        assert!(subs.iter().all(|x| x.is_subset(s) && !x.is_empty()));
        assert_eq!(QubitSet::EMPTY.nonempty_subsets().count(), 0);
    }

    #[test]
    fn positions_are_big_endian() {
        let s = QubitSet::range(3);
        assert_eq!(bit_position(s, 0), 2);
        assert_eq!(bit_position(s, 2), 0);
        assert_eq!(scatter_table(&[2, 0]), vec![0, 1, 4, 5]);
    }
}
