//! Fixed-capacity bitsets over value indices.

use std::fmt;

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A set of value indices drawn from `0..capacity`.
///
/// Used both for active domains and for images of relations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueSet {
    capacity: usize,
    words: Vec<u64>,
}

impl ValueSet {
    pub fn empty(capacity: usize) -> Self {
        ValueSet {
            capacity,
            words: vec![0; words_for(capacity)],
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut set = Self::empty(capacity);
        for w in set.words.iter_mut() {
            *w = !0;
        }
        set.trim();
        set
    }

    pub fn singleton(capacity: usize, value: usize) -> Self {
        let mut set = Self::empty(capacity);
        set.insert(value);
        set
    }

    pub fn from_values<I: IntoIterator<Item = usize>>(capacity: usize, values: I) -> Self {
        let mut set = Self::empty(capacity);
        for v in values {
            set.insert(v);
        }
        set
    }

    pub(crate) fn from_words(capacity: usize, words: &[u64]) -> Self {
        debug_assert_eq!(words.len(), words_for(capacity));
        ValueSet {
            capacity,
            words: words.to_vec(),
        }
    }

    fn trim(&mut self) {
        let rem = self.capacity % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, value: usize) -> bool {
        value < self.capacity && self.words[value / WORD] >> (value % WORD) & 1 == 1
    }

    /// Inserts `value`; returns true when it was not already present.
    pub fn insert(&mut self, value: usize) -> bool {
        assert!(value < self.capacity, "value {value} out of range {}", self.capacity);
        let w = &mut self.words[value / WORD];
        let bit = 1u64 << (value % WORD);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn remove(&mut self, value: usize) -> bool {
        if value >= self.capacity {
            return false;
        }
        let w = &mut self.words[value / WORD];
        let bit = 1u64 << (value % WORD);
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity
    }

    /// In-place intersection. Returns true when the set shrank.
    pub fn intersect_with(&mut self, other: &ValueSet) -> bool {
        debug_assert_eq!(self.capacity, other.capacity);
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let next = *a & *b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }

    pub fn union_with(&mut self, other: &ValueSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub(crate) fn union_with_words(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a |= *b;
        }
    }

    pub fn intersection(&self, other: &ValueSet) -> ValueSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn intersects(&self, other: &ValueSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }
}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Ascending iterator over the members of a [`ValueSet`].
pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

/// Iterates the set bits of a raw word slice.
pub(crate) fn iter_bits(words: &[u64]) -> Iter<'_> {
    Iter {
        words,
        index: 0,
        current: words.first().copied().unwrap_or(0),
    }
}
