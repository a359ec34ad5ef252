//! Bit-packed GF(2) vectors and matrices.
//!
//! Coordinate `i + 1` of a vector lives in bit `i % 64` of word `i / 64`.
//! Integer encodings used by truth tables and small-set kernels follow the
//! same convention: bit `i` of the integer is coordinate `i + 1`.
//!
//! Vectors are ordered canonically: by length, then Hamming weight, then
//! lexicographically on the sorted 0-based support list. Every enumeration
//! in the crate (balls, weight slices, monomials) uses that order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::Stream;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A vector in F_2^n.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// The unit vector with coordinate `i + 1` set.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Vector whose coordinate `i + 1` is bit `i` of `value`. Bits at or
    /// beyond `len` are dropped.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if let Some(w) = v.words.first_mut() {
            *w = value;
        }
        v.clear_tail();
        v
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Vector with the given 0-based coordinates set.
    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &i in support {
            if i >= len {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {i} out of range for length {len}"
                )));
            }
            v.set(i, true);
        }
        Ok(v)
    }

    pub fn random(len: usize, rng: &mut Stream) -> Self {
        let words = (0..words_for(len)).map(|_| rng.gen::<u64>()).collect();
        Self::from_words(len, words)
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

    /// The integer encoding. Panics if the vector is longer than 64.
    #[inline]
    pub fn to_u64(&self) -> u64 {
        assert!(
            self.len <= WORD,
            "vector of length {} has no u64 form",
            self.len
        );
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "coordinate {i} out of range (len {})",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "coordinate {i} out of range (len {})",
            self.len
        );
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "coordinate {i} out of range (len {})",
            self.len
        );
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "and of vectors with different lengths");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Self {
            len: self.len,
            words,
        }
    }

    /// GF(2) inner product.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        dot_words(&self.words, &other.words)
    }

    /// True if every coordinate set in `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// 0-based indices of the set coordinates, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Lowest set coordinate (0-based).
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    /// `(self, other)` as one vector of length `self.len() + other.len()`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Coordinates `start..end` (0-based, half open).
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(
            start <= end && end <= self.len,
            "slice {start}..{end} of length {}",
            self.len
        );
        let mut out = Self::zeros(end - start);
        for i in self.iter_ones().filter(|&i| i >= start && i < end) {
            out.set(i - start, true);
        }
        out
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }
}

#[inline]
pub(crate) fn dot_words(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.weight().cmp(&other.weight()))
            .then_with(|| self.iter_ones().cmp(other.iter_ones()))
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::parse(
                        format!("character {i}"),
                        format!("expected '0' or '1', found {other:?}"),
                    ))
                }
            }
        }
        Ok(Self::from_bits(bits))
    }
}

impl serde::Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BitVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A dense `rows × cols` matrix over GF(2), stored row-major in one buffer.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from row vectors of length `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(rows: usize, columns: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::LengthMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
            for i in c.iter_ones() {
                m.set(i, j, true);
            }
        }
        Ok(m)
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
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(i).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_bits((0..self.rows).map(|i| self.get(i, j)))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i}, {j}) out of range"
        );
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(
            i < self.rows && j < self.cols,
            "entry ({i}, {j}) out of range"
        );
        let w = &mut self.data[i * self.stride + j / WORD];
        let mask = 1u64 << (j % WORD);
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// The product `M x`.
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(BitVector::from_bits(
            (0..self.rows).map(|i| dot_words(self.row_words(i), x.words())),
        ))
    }

    /// `M x` on integer encodings; requires `cols <= 64` and `rows <= 64`.
    #[inline]
    pub fn mul_u64(&self, x: u64) -> u64 {
        debug_assert!(self.cols <= WORD && self.rows <= WORD);
        let mut out = 0u64;
        for i in 0..self.rows {
            out |= (((self.data[i] & x).count_ones() & 1) as u64) << i;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in BitVector::from_words(self.cols, self.row_words(i).to_vec()).iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// The product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = BitVector::from_words(self.cols, self.row_words(i).to_vec());
            for k in row.iter_ones() {
                let (src_start, dst_start) = (k * other.stride, i * out.stride);
                for w in 0..out.stride {
                    out.data[dst_start + w] ^= other.data[src_start + w];
                }
            }
        }
        Ok(out)
    }

    /// Row rank by word-level elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        let mut scratch = self.data.clone();
        eliminate(&mut scratch, self.rows, self.cols, self.stride, false).len()
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = eliminate(&mut m.data, m.rows, m.cols, m.stride, true);
        (m, pivots)
    }

    /// A basis of `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<BitVector> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (row, &p) in pivots.iter().enumerate() {
                if r.get(row, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in BitVector::from_words(n, self.row_words(i).to_vec()).iter_ones() {
                aug.set(i, j, true);
            }
            aug.set(i, n + i, true);
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if r.get(i, n + j) {
                    inv.set(i, j, true);
                }
            }
        }
        Some(inv)
    }
}

/// Gaussian elimination in place over a row-major word buffer. Returns the
/// pivot columns in row order. With `reduce`, rows above each pivot are
/// cleared too (RREF); otherwise only rows below.
fn eliminate(
    data: &mut [u64],
    rows: usize,
    cols: usize,
    stride: usize,
    reduce: bool,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (w, bit) = (col / WORD, 1u64 << (col % WORD));
        let Some(p) = (rank..rows).find(|&r| data[r * stride + w] & bit != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..stride {
                data.swap(p * stride + k, rank * stride + k);
            }
        }
        let (head, tail) = data.split_at_mut((rank + 1) * stride);
        let pivot_row = &head[rank * stride..];
        for r in 0..(rows - rank - 1) {
            let row = &mut tail[r * stride..(r + 1) * stride];
            if row[w] & bit != 0 {
                for k in w..stride {
                    row[k] ^= pivot_row[k];
                }
            }
        }
        if reduce {
            let (above, rest) = data.split_at_mut(rank * stride);
            let pivot_row = &rest[..stride];
            for r in 0..rank {
                let row = &mut above[r * stride..(r + 1) * stride];
                if row[w] & bit != 0 {
                    for k in w..stride {
                        row[k] ^= pivot_row[k];
                    }
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{})\n{self}", self.rows, self.cols)
    }
}

impl FromStr for BitMatrix {
    type Err = Error;

    /// Newline-separated row strings; blank lines are ignored. An input with
    /// no rows parses as the 0×0 matrix.
    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: BitVector = line.parse().map_err(|e| match e {
                Error::Parse { message, .. } => {
                    Error::parse(format!("line {}", lineno + 1), message)
                }
                other => other,
            })?;
            rows.push(v);
        }
        let cols = rows.first().map_or(0, BitVector::len);
        Self::from_rows(cols, &rows)
    }
}

/// Serialized as an array of row strings; an empty array is the 0×0 matrix.
impl serde::Serialize for BitMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq((0..self.rows).map(|i| self.row(i).to_string()))
    }
}

impl<'de> serde::Deserialize<'de> for BitMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<BitVector> = Vec::deserialize(d)?;
        let cols = rows.first().map_or(0, BitVector::len);
        BitMatrix::from_rows(cols, &rows).map_err(serde::de::Error::custom)
    }
}

/// Row vectors inserted one at a time, kept reduced against each other.
///
/// Each stored row has a distinct pivot (its lowest set coordinate) that
/// no later row contains, so reducing in insertion order clears all pivots.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<(usize, Vec<u64>)>,
    scratch: Vec<u64>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            rows: Vec::new(),
            scratch: vec![0; words_for(len)],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts `v`; returns true if it was independent of the basis.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len, "vector length differs from basis length");
        self.insert_words(v.words())
    }

    pub fn insert_words(&mut self, v: &[u64]) -> bool {
        self.scratch.copy_from_slice(v);
        self.reduce_scratch();
        match first_one(&self.scratch) {
            None => false,
            Some(p) => {
                self.rows.push((p, self.scratch.clone()));
                true
            }
        }
    }

    /// True if `v` lies in the span.
    pub fn contains(&mut self, v: &BitVector) -> bool {
        self.scratch.copy_from_slice(v.words());
        self.reduce_scratch();
        self.scratch.iter().all(|&w| w == 0)
    }

    fn reduce_scratch(&mut self) {
        for (p, row) in &self.rows {
            if (self.scratch[p / WORD] >> (p % WORD)) & 1 == 1 {
                for (a, b) in self.scratch.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
    }
}

fn first_one(words: &[u64]) -> Option<usize> {
    words
        .iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
}

/// GF(2) row rank.
pub fn rank(m: &BitMatrix) -> usize {
    m.rank()
}

/// Rank of the span of a list of vectors of common length `len`.
pub fn span_dim(len: usize, vectors: &[BitVector]) -> usize {
    let mut basis = EchelonBasis::new(len);
    vectors.iter().filter(|v| basis.insert(v)).count()
}

/// All `2^t` elements of the span of `basis` (assumed independent), in
/// Gray-code order starting from zero.
pub fn span_elements(len: usize, basis: &[BitVector]) -> Vec<BitVector> {
    let mut out = Vec::with_capacity(1 << basis.len());
    let mut cur = BitVector::zeros(len);
    out.push(cur.clone());
    for i in 1u64..(1u64 << basis.len()) {
        cur.xor_assign(&basis[i.trailing_zeros() as usize]);
        out.push(cur.clone());
    }
    out
}

/// A matrix with independent uniform entries.
pub fn sample_uniform_matrix(rows: usize, cols: usize, rng: &mut Stream) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    let mask = tail_mask(cols);
    for i in 0..rows {
        let row = m.row_words_mut(i);
        for w in row.iter_mut() {
            *w = rng.gen();
        }
        if let Some(last) = row.last_mut() {
            *last &= mask;
        }
    }
    m
}

/// Per-column retry cap for [`sample_invertible`].
pub const INVERTIBLE_RETRIES: u64 = 1_000_000;

/// A uniformly random invertible `m × m` matrix: column `i` is drawn
/// uniformly, conditioned on independence from columns `1..i`.
pub fn sample_invertible(m: usize, rng: &mut Stream) -> Result<BitMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "invertible matrix needs m >= 1".into(),
        ));
    }
    let mut basis = EchelonBasis::new(m);
    let mut columns = Vec::with_capacity(m);
    for _ in 0..m {
        let mut tries = 0;
        loop {
            tries += 1;
            let c = BitVector::random(m, rng);
            if basis.insert(&c) {
                columns.push(c);
                break;
            }
            if tries >= INVERTIBLE_RETRIES {
                return Err(Error::RetriesExhausted {
                    what: "invertible column",
                    attempts: tries,
                });
            }
        }
    }
    BitMatrix::from_columns(m, &columns)
}

/// The Hamming ball of radius `r` around zero, in canonical order.
pub fn hamming_ball(n: usize, r: usize) -> Vec<BitVector> {
    (0..=r.min(n))
        .flat_map(|w| (0..n).combinations(w))
        .map(|s| BitVector::from_support(n, &s).expect("indices below n"))
        .collect()
}

/// Vectors of weight exactly `w` supported inside coordinates `lo..=hi`
/// (1-based, inclusive), in canonical order.
pub fn weight_slice(n: usize, w: usize, lo: usize, hi: usize) -> Result<Vec<BitVector>> {
    if lo < 1 || lo > hi || hi > n {
        return Err(Error::InvalidParameter(format!(
            "weight slice needs 1 <= lo <= hi <= n, got lo={lo} hi={hi} n={n}"
        )));
    }
    if w > hi - lo + 1 {
        return Err(Error::InvalidParameter(format!(
            "weight {w} exceeds band width {}",
            hi - lo + 1
        )));
    }
    Ok(((lo - 1)..hi)
        .combinations(w)
        .map(|s| BitVector::from_support(n, &s).expect("indices below n"))
        .collect())
}

/// `C(n, k)` exactly.
pub fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= (n - i) as u64;
        acc /= (i + 1) as u64;
    }
    acc
}

/// `C(n, <= d) = Σ_{i<=d} C(n, i)` exactly.
pub fn binom_sum(n: usize, d: usize) -> BigUint {
    if d >= n {
        return BigUint::one() << n;
    }
    (0..=d).map(|i| binom(n, i)).sum()
}

/// [`binom_sum`] when it fits in a `usize`.
pub fn binom_sum_usize(n: usize, d: usize) -> Option<usize> {
    let v = binom_sum(n, d);
    usize::try_from(&v).ok()
}

/// In-place Möbius transform of a packed truth table of `2^n` bits.
///
/// Maps a truth table to its ANF coefficient table and back (the transform
/// is an involution over GF(2)). Entry `x` of either table sits at bit
/// `x % 64` of word `x / 64`.
pub fn moebius_in_place(words: &mut [u64], n: usize) {
    const MASKS: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0F0F_0F0F_0F0F_0F0F,
        0x00FF_00FF_00FF_00FF,
        0x0000_FFFF_0000_FFFF,
        0x0000_0000_FFFF_FFFF,
    ];
    let expected = if n >= 6 { 1usize << (n - 6) } else { 1 };
    assert_eq!(
        words.len(),
        expected,
        "table of 2^{n} bits needs {expected} words"
    );
    for (level, &mask) in MASKS.iter().enumerate().take(n.min(6)) {
        let shift = 1 << level;
        for w in words.iter_mut() {
            *w ^= (*w & mask) << shift;
        }
    }
    if n > 6 {
        let mut step = 1;
        while step < words.len() {
            for base in (0..words.len()).step_by(2 * step) {
                for i in base..base + step {
                    words[i + step] ^= words[i];
                }
            }
            step *= 2;
        }
    }
}
