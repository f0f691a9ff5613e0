//! Binary relations as row-packed boolean matrices.
//!
//! A relation between a source domain of size `rows` and a target domain of
//! size `cols` stores bit `(a, b)` when the pair is allowed. Row `a` is the
//! image of the single value `a`, so images and compositions reduce to
//! OR-accumulation of rows.

use std::fmt;

use crate::bitset::{iter_bits, words_for, ValueSet};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Relation {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    /// The all-ones matrix `D_i x D_j`.
    pub fn universal(rows: usize, cols: usize) -> Self {
        let full = ValueSet::full(cols);
        let mut r = Self::empty(rows, cols);
        for a in 0..rows {
            r.row_mut(a).copy_from_slice(full.words());
        }
        r
    }

    /// `left x right`, used for universal constraints over pruned domains.
    pub fn product(left: &ValueSet, right: &ValueSet) -> Self {
        let mut r = Self::empty(left.capacity(), right.capacity());
        for a in left.iter() {
            r.row_mut(a).copy_from_slice(right.words());
        }
        r
    }

    pub fn from_tuples<I: IntoIterator<Item = (usize, usize)>>(
        rows: usize,
        cols: usize,
        tuples: I,
    ) -> Self {
        let mut r = Self::empty(rows, cols);
        for (a, b) in tuples {
            r.insert(a, b);
        }
        r
    }

    /// Builds a relation from a dense 0/1 matrix given row by row.
    pub fn from_matrix(matrix: &[&[u8]]) -> Self {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, |r| r.len());
        let mut r = Self::empty(rows, cols);
        for (a, row) in matrix.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (b, &bit) in row.iter().enumerate() {
                if bit != 0 {
                    r.insert(a, b);
                }
            }
        }
        r
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub(crate) fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.stride..(a + 1) * self.stride]
    }

    #[inline]
    fn row_mut(&mut self, a: usize) -> &mut [u64] {
        &mut self.bits[a * self.stride..(a + 1) * self.stride]
    }

    /// The image `R(a)` of a single source value.
    pub fn row_set(&self, a: usize) -> ValueSet {
        ValueSet::from_words(self.cols, self.row(a))
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.rows && b < self.cols && self.row(a)[b / 64] >> (b % 64) & 1 == 1
    }

    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        assert!(a < self.rows && b < self.cols, "tuple ({a}, {b}) out of range");
        let stride = self.stride;
        let w = &mut self.bits[a * stride + b / 64];
        let bit = 1u64 << (b % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn remove(&mut self, a: usize, b: usize) -> bool {
        if a >= self.rows || b >= self.cols {
            return false;
        }
        let stride = self.stride;
        let w = &mut self.bits[a * stride + b / 64];
        let bit = 1u64 << (b % 64);
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Number of allowed tuples.
    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_universal(&self) -> bool {
        self.len() == self.rows * self.cols
    }

    /// Fraction of allowed tuples among all `rows * cols` pairs.
    pub fn looseness(&self) -> f64 {
        if self.rows * self.cols == 0 {
            return 0.0;
        }
        self.len() as f64 / (self.rows * self.cols) as f64
    }

    /// Allowed tuples in row-major order.
    pub fn tuples(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |a| iter_bits(self.row(a)).map(move |b| (a, b)))
    }

    fn check_same_shape(&self, other: &Relation) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.mismatch(other));
        }
        Ok(())
    }

    fn mismatch(&self, other: &Relation) -> Error {
        Error::DimensionMismatch {
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }

    /// `R^-1`, the transpose.
    pub fn inverse(&self) -> Relation {
        let mut out = Relation::empty(self.cols, self.rows);
        for (a, b) in self.tuples() {
            out.insert(b, a);
        }
        out
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        let mut out = self.clone();
        out.intersect_with(other)?;
        Ok(out)
    }

    /// In-place `R <- R ∩ S`. Returns whether any tuple was removed.
    pub fn intersect_with(&mut self, other: &Relation) -> Result<bool> {
        self.check_same_shape(other)?;
        let mut changed = false;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            let next = *a & *b;
            changed |= next != *a;
            *a = next;
        }
        Ok(changed)
    }

    pub fn union_with(&mut self, other: &Relation) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &Relation) -> Result<bool> {
        self.check_same_shape(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    /// `R ∘ S = {(a, c) | ∃b: (a, b) ∈ R, (b, c) ∈ S}`.
    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        if self.cols != other.rows {
            return Err(self.mismatch(other));
        }
        let mut out = Relation::empty(self.rows, other.cols);
        for a in 0..self.rows {
            let stride = out.stride;
            let dst = &mut out.bits[a * stride..(a + 1) * stride];
            for b in iter_bits(self.row(a)) {
                for (d, s) in dst.iter_mut().zip(other.row(b)) {
                    *d |= *s;
                }
            }
        }
        Ok(out)
    }

    /// Composition restricted to intermediate values in `middle`, i.e.
    /// `R ∘ diag(middle) ∘ S`.
    pub fn compose_through(&self, middle: &ValueSet, other: &Relation) -> Result<Relation> {
        if self.cols != other.rows || middle.capacity() != self.cols {
            return Err(self.mismatch(other));
        }
        let mut out = Relation::empty(self.rows, other.cols);
        let mask = middle.words();
        for a in 0..self.rows {
            let stride = out.stride;
            let dst = &mut out.bits[a * stride..(a + 1) * stride];
            let row = self.row(a);
            for (wi, (&w, &m)) in row.iter().zip(mask).enumerate() {
                let mut bits = w & m;
                while bits != 0 {
                    let b = wi * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (d, s) in dst.iter_mut().zip(other.row(b)) {
                        *d |= *s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `R(S) = {b | ∃a ∈ S: (a, b) ∈ R}`. Values of `set` beyond the source
    /// domain are ignored.
    pub fn image(&self, set: &ValueSet) -> ValueSet {
        let mut out = ValueSet::empty(self.cols);
        for a in set.iter().take_while(|&a| a < self.rows) {
            out.union_with_words(self.row(a));
        }
        out
    }

    /// Source values with at least one partner: `R^-1(D_j)`.
    pub fn support(&self) -> ValueSet {
        ValueSet::from_values(
            self.rows,
            (0..self.rows).filter(|&a| self.row(a).iter().any(|&w| w != 0)),
        )
    }

    /// `R ∩ (left x right)`. Returns whether any tuple was removed.
    pub fn restrict_to(&mut self, left: &ValueSet, right: &ValueSet) -> bool {
        let mut changed = false;
        for a in 0..self.rows {
            let keep_row = left.contains(a);
            let stride = self.stride;
            let row = &mut self.bits[a * stride..(a + 1) * stride];
            for (w, m) in row.iter_mut().zip(right.words()) {
                let next = if keep_row { *w & *m } else { 0 };
                changed |= next != *w;
                *w = next;
            }
        }
        changed
    }

    /// Whether `R` relates every value of `left` to some value of `right`.
    pub fn supports_all(&self, left: &ValueSet, right: &ValueSet) -> bool {
        left.iter().all(|a| {
            self.row(a)
                .iter()
                .zip(right.words())
                .any(|(w, m)| w & m != 0)
        })
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation[{}x{}]", self.rows, self.cols)?;
        f.debug_set().entries(self.tuples()).finish()
    }
}
