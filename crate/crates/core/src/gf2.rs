// Copyright contributors to the qmaxwell project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Linear algebra over GF(2) on bit-packed rows.
//!
//! Rows are stored as `u64` words and every elimination step is a word-level
//! XOR. Pivoting always takes the first row with a set bit in the current
//! column, so results are fully deterministic.

use std::fmt;
use std::ops::{BitAnd, BitXor, BitXorAssign};

use thiserror::Error;

const WORD_BITS: usize = 64;

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("linear system is inconsistent")]
    Inconsistent,
}

/// A vector over GF(2), packed 64 bits per word.
///
/// Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; word_count(len)],
            len,
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { words, len }
    }

    /// Builds a vector from a slice of 0/1 values; any nonzero byte is a one.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_bools(bits.iter().map(|&b| b != 0))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let t = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * WORD_BITS + t)
                }
            })
        })
    }

    pub fn ones(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot product of mismatched lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of mismatched lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Appends one bit, growing the vector.
    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD_BITS) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    /// Renders as a string of `0`/`1` characters.
    pub fn to_bit_string(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}]", self.to_bit_string())
    }
}

impl BitXorAssign<&BitVector> for BitVector {
    fn bitxor_assign(&mut self, rhs: &BitVector) {
        self.xor_assign(rhs);
    }
}

impl BitXor<&BitVector> for &BitVector {
    type Output = BitVector;
    fn bitxor(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl BitAnd<&BitVector> for &BitVector {
    type Output = BitVector;
    fn bitand(self, rhs: &BitVector) -> BitVector {
        assert_eq!(self.len, rhs.len);
        BitVector {
            words: self.words.iter().zip(&rhs.words).map(|(a, b)| a & b).collect(),
            len: self.len,
        }
    }
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n_cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_cols,
            rows: vec![BitVector::zeros(n_cols); n_rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(n_cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Gf2Error::DimensionMismatch {
                expected: n_cols,
                found: bad.len(),
            });
        }
        Ok(Self { n_cols, rows })
    }

    /// Builds a matrix from rows of 0/1 values.
    ///
    /// Panics if the rows are ragged.
    pub fn from_dense<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let rows: Vec<BitVector> = rows
            .iter()
            .map(|r| {
                assert_eq!(r.as_ref().len(), n_cols, "ragged dense matrix");
                BitVector::from_bits(r.as_ref())
            })
            .collect();
        Self { n_cols, rows }
    }

    /// Builds a matrix from per-row lists of set column indices.
    pub fn from_sparse(n_cols: usize, rows: &[Vec<usize>]) -> Self {
        Self {
            n_cols,
            rows: rows
                .iter()
                .map(|r| BitVector::from_indices(n_cols, r))
                .collect(),
        }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &BitVector {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.rows[r].count_ones()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n_cols];
        for row in &self.rows {
            for c in row.iter_ones() {
                w[c] += 1;
            }
        }
        w
    }

    pub fn max_row_weight(&self) -> usize {
        (0..self.n_rows()).map(|r| self.row_weight(r)).max().unwrap_or(0)
    }

    pub fn max_col_weight(&self) -> usize {
        self.col_weights().into_iter().max().unwrap_or(0)
    }

    /// Per-row sorted lists of set columns.
    pub fn to_sparse_rows(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(BitVector::ones).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                out.set(c, r, true);
            }
        }
        out
    }

    pub fn hstack(&self, rhs: &Self) -> Self {
        assert_eq!(self.n_rows(), rhs.n_rows(), "hstack of mismatched heights");
        let n_cols = self.n_cols + rhs.n_cols;
        let rows = self
            .rows
            .iter()
            .zip(&rhs.rows)
            .map(|(a, b)| {
                let mut v = BitVector::zeros(n_cols);
                for c in a.iter_ones() {
                    v.set(c, true);
                }
                for c in b.iter_ones() {
                    v.set(self.n_cols + c, true);
                }
                v
            })
            .collect();
        Self { n_cols, rows }
    }

    pub fn vstack(&self, rhs: &Self) -> Self {
        assert_eq!(self.n_cols, rhs.n_cols, "vstack of mismatched widths");
        let mut rows = self.rows.clone();
        rows.extend(rhs.rows.iter().cloned());
        Self {
            n_cols: self.n_cols,
            rows,
        }
    }

    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.n_cols, "matrix-vector dimension mismatch");
        BitVector::from_bools(self.rows.iter().map(|r| r.dot(v)))
    }

    /// Computes `self · rhsᵀ`.
    pub fn mul_transpose(&self, rhs: &Self) -> Self {
        assert_eq!(self.n_cols, rhs.n_cols);
        let rows = self
            .rows
            .iter()
            .map(|a| BitVector::from_bools(rhs.rows.iter().map(|b| a.dot(b))))
            .collect();
        Self {
            n_cols: rhs.n_rows(),
            rows,
        }
    }

    /// Copies the selected columns, in the given order, into a new matrix.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| BitVector::from_bools(cols.iter().map(|&c| r.get(c))))
            .collect();
        Self {
            n_cols: cols.len(),
            rows,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        reduce_rows(&mut rows, self.n_cols).len()
    }

    /// Solves `self · x = b`.
    ///
    /// Free variables are set to zero in the particular solution; the
    /// nullspace basis has one vector per free column.
    pub fn solve(&self, b: &BitVector) -> Result<Solution, Gf2Error> {
        if b.len() != self.n_rows() {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.n_rows(),
                found: b.len(),
            });
        }
        let n = self.n_cols;
        let mut aug: Vec<BitVector> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut a = r.clone();
                a.push(b.get(i));
                a
            })
            .collect();
        let pivots = reduce_rows(&mut aug, n);
        if aug[pivots.len()..].iter().any(|r| r.get(n)) {
            return Err(Gf2Error::Inconsistent);
        }
        let mut particular = BitVector::zeros(n);
        let mut is_pivot = vec![false; n];
        for (r, &p) in pivots.iter().enumerate() {
            is_pivot[p] = true;
            if aug[r].get(n) {
                particular.set(p, true);
            }
        }
        let nullspace_basis = (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::zeros(n);
                v.set(f, true);
                for (r, &p) in pivots.iter().enumerate() {
                    if aug[r].get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        Ok(Solution {
            particular,
            nullspace_basis,
        })
    }

    /// Basis of `{x : self · x = 0}`.
    pub fn nullspace(&self) -> Vec<BitVector> {
        self.solve(&BitVector::zeros(self.n_rows()))
            .expect("homogeneous systems are always consistent")
            .nullspace_basis
    }

    /// True iff `v` is a GF(2) sum of rows of `self`.
    pub fn in_row_space(&self, v: &BitVector) -> bool {
        RowBasis::new(self).contains(v)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.n_rows(), self.n_cols)?;
        for r in &self.rows {
            writeln!(f, "  {}", r.to_bit_string())?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub particular: BitVector,
    pub nullspace_basis: Vec<BitVector>,
}

/// Reduces `rows` to reduced row echelon form over the first `n_cols`
/// columns, moving pivot rows to the front. Returns the pivot column of
/// each leading row.
fn reduce_rows(rows: &mut [BitVector], n_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..n_cols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        let (head, tail) = rows.split_at_mut(next);
        let (pivot_row, tail) = tail.split_first_mut().unwrap();
        for r in head.iter_mut().chain(tail.iter_mut()) {
            if r.get(col) {
                r.xor_assign(pivot_row);
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}

/// A row space held in reduced row echelon form, for repeated membership
/// queries against the same matrix.
#[derive(Debug, Clone)]
pub struct RowBasis {
    n_cols: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl RowBasis {
    pub fn new(m: &BitMatrix) -> Self {
        let mut rows = m.rows.clone();
        let pivots = reduce_rows(&mut rows, m.n_cols);
        rows.truncate(pivots.len());
        Self {
            n_cols: m.n_cols,
            rows,
            pivots,
        }
    }

    pub fn empty(n_cols: usize) -> Self {
        Self {
            n_cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    /// Reduces `v` in place against the basis. The result is zero iff `v`
    /// was in the span.
    pub fn reduce(&self, v: &mut BitVector) {
        assert_eq!(v.len(), self.n_cols, "row space dimension mismatch");
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Adds `v` to the span. Returns false (and leaves the basis unchanged)
    /// when `v` is already in it.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        let Some(p) = w.first_one() else {
            return false;
        };
        for row in &mut self.rows {
            if row.get(p) {
                row.xor_assign(&w);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, w);
        true
    }
}
