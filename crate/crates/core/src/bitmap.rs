//! Dense instance bitmaps used for token columns, supports and covers.

use std::fmt;

const WORD: usize = 64;

/// A set of instance indices over `0..n`, stored as a dense bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct InstanceBitmap {
    words: Vec<u64>,
    n: usize,
}

impl InstanceBitmap {
    pub fn empty(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(WORD)], n }
    }

    pub fn full(n: usize) -> Self {
        let mut b = Self { words: vec![!0; n.div_ceil(WORD)], n };
        b.clear_tail();
        b
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut b = Self::empty(n);
        for i in indices {
            b.insert(i);
        }
        b
    }

    fn clear_tail(&mut self) {
        let rem = self.n % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Universe size.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "index {i} out of range for bitmap of {}", self.n);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.n, "index {i} out of range for bitmap of {}", self.n);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    /// Cardinality.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    pub fn and(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            n: self.n,
        }
    }

    pub fn or(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
            n: self.n,
        }
    }

    /// `self \ other`
    pub fn and_not(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
            n: self.n,
        }
    }

    pub fn and_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= b);
    }

    pub fn or_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a |= b);
    }

    pub fn and_not_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= !b);
    }

    /// `|self ∩ other|` without allocating.
    pub fn and_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self \ other|` without allocating.
    pub fn and_not_count(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for InstanceBitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_respects_universe() {
        for n in [0, 1, 63, 64, 65, 130] {
            let b = InstanceBitmap::full(n);
            assert_eq!(b.count(), n);
            assert_eq!(b.iter().collect::<Vec<_>>(), (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn contains_out_of_range_is_false() {
        let b = InstanceBitmap::full(5);
        assert!(!b.contains(5));
    }

    proptest! {
        #[test]
        fn set_ops_agree_with_btreeset(
            n in 1usize..200,
            a in proptest::collection::vec(0usize..200, 0..60),
            b in proptest::collection::vec(0usize..200, 0..60),
        ) {
            use std::collections::BTreeSet;
            let a: BTreeSet<usize> = a.into_iter().filter(|&i| i < n).collect();
            let b: BTreeSet<usize> = b.into_iter().filter(|&i| i < n).collect();
            let ba = InstanceBitmap::from_indices(n, a.iter().copied());
            let bb = InstanceBitmap::from_indices(n, b.iter().copied());
            prop_assert_eq!(ba.and(&bb).iter().collect::<BTreeSet<_>>(), &a & &b);
            prop_assert_eq!(ba.or(&bb).iter().collect::<BTreeSet<_>>(), &a | &b);
            prop_assert_eq!(ba.and_not(&bb).iter().collect::<BTreeSet<_>>(), &a - &b);
            prop_assert_eq!(ba.and_count(&bb), (&a & &b).len());
            prop_assert_eq!(ba.and_not_count(&bb), (&a - &b).len());
            prop_assert_eq!(ba.is_subset(&bb), a.is_subset(&b));
        }
    }
}
