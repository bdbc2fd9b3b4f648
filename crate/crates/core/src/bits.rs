//! Word-packed vertex sets.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Number of set bits in `a XOR b`.
#[inline]
pub fn xor_count(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

/// Number of set bits in `a AND b`.
#[inline]
pub fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

#[inline]
pub fn popcount(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

/// A subset of one vertex class, stored as a bitmask over `0..len`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    part: usize,
    len: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(part: usize, len: usize) -> Self {
        Self {
            part,
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn full(part: usize, len: usize) -> Self {
        let mut s = Self::empty(part, len);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(
        part: usize,
        len: usize,
        indices: I,
    ) -> Result<Self> {
        let mut s = Self::empty(part, len);
        for i in indices {
            if i >= len {
                return Err(Error::OutOfRange {
                    part,
                    index: i,
                    size: len,
                });
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn from_fn(part: usize, len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::empty(part, len);
        for i in 0..len {
            if f(i) {
                s.insert(i);
            }
        }
        s
    }

    /// Wraps raw words; bits beyond `len` are cleared.
    pub fn from_words(part: usize, len: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), words_for(len), "word count does not match length");
        let mut s = Self { part, len, words };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn part(&self) -> usize {
        self.part
    }

    pub fn with_part(mut self, part: usize) -> Self {
        self.part = part;
        self
    }

    /// Size of the universe (the part), not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count(&self) -> usize {
        popcount(&self.words)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// `|self Δ other|`, one popcount per word.
    pub fn sym_diff_count(&self, other: &VertexSet) -> usize {
        debug_assert_eq!(self.len, other.len);
        xor_count(&self.words, &other.words)
    }

    pub fn intersection_count(&self, other: &VertexSet) -> usize {
        debug_assert_eq!(self.len, other.len);
        and_count(&self.words, &other.words)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> VertexSet {
        let mut s = Self {
            part: self.part,
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn zip_with(&self, other: &VertexSet, f: impl Fn(u64, u64) -> u64) -> VertexSet {
        debug_assert_eq!(self.len, other.len);
        VertexSet {
            part: self.part,
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VertexSet(part {}, {:?})", self.part, self.to_vec())
    }
}
