//! Dense GF(2) vectors and matrices.
//!
//! Rows are packed into `u64` words, least-significant bit first. Small
//! vectors (length at most 64) used inside subcodes are plain `u64` masks and
//! go through [`XorBasis`] instead.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A GF(2) vector of arbitrary length.
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

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` from the low bits of `mask`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        assert!(len <= WORD);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == WORD { mask } else { mask & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    fn leading_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * WORD + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        Ok(())
    }
}

/// Row-major packed GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, Gf2Error> {
        if rows == 0 || cols == 0 {
            return Err(Gf2Error::Empty);
        }
        let row_words = words_for(cols);
        Ok(Self {
            rows,
            cols,
            row_words,
            data: vec![0; rows * row_words],
        })
    }

    pub fn identity(n: usize) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    /// Builds a matrix from nested 0/1 rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, Gf2Error> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Gf2Error::LengthMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn from_row_vectors(rows: &[BitVector]) -> Result<Self, Gf2Error> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Gf2Error::LengthMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            m.row_words_mut(i).copy_from_slice(&r.words);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.row_words + c / WORD] >> (c % WORD)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let idx = r * self.row_words + c / WORD;
        let bit = 1u64 << (c % WORD);
        if value {
            self.data[idx] |= bit;
        } else {
            self.data[idx] &= !bit;
        }
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    /// Low `rows` bits of column `c` as a mask. Requires `rows <= 64`.
    pub fn column_mask(&self, c: usize) -> u64 {
        assert!(self.rows <= WORD);
        (0..self.rows).fold(0u64, |acc, r| acc | ((self.get(r, c) as u64) << r))
    }

    /// Row `r` as a mask. Requires `cols <= 64`.
    pub fn row_mask(&self, r: usize) -> u64 {
        assert!(self.cols <= WORD);
        self.row_words(r)[0]
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows).expect("non-empty");
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Syndrome-style product `self * v`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(&v.words)
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
                & 1;
            if parity == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            if p != next {
                for w in 0..self.row_words {
                    self.data.swap(p * self.row_words + w, next * self.row_words + w);
                }
            }
            let pivot_row = self.row_words(next).to_vec();
            for r in 0..self.rows {
                if r != next && self.get(r, c) {
                    for (a, b) in self.row_words_mut(r).iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// The original rows, in order, with each row dropped that lies in the
    /// span of the rows kept before it.
    pub fn independent_rows(&self) -> Option<BitMatrix> {
        let mut kept: Vec<BitVector> = Vec::new();
        for r in 0..self.rows {
            kept.push(self.row(r));
            let m = BitMatrix::from_row_vectors(&kept).ok()?;
            if gf2_rank(&m) < kept.len() {
                kept.pop();
            }
        }
        if kept.is_empty() {
            return None;
        }
        BitMatrix::from_row_vectors(&kept).ok()
    }

    /// A basis of `{x : self * x = 0}`.
    pub fn nullspace_basis(&self) -> Vec<BitVector> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - pivots.len());
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVector::zeros(self.cols);
            v.set(free, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "{:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Plain-text format: one row per line, space-separated 0/1 entries.
impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: Vec<&str> = (0..self.cols)
                .map(|c| if self.get(r, c) { "1" } else { "0" })
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for BitMatrix {
    type Err = Gf2Error;

    /// Accepts an optional leading `# n=<n> k=<k>` header; other `#` lines and
    /// blank lines are ignored. The header's `n` is checked against the width.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        let mut header_n = None;
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(n) = tok.strip_prefix("n=") {
                        header_n = Some(n.parse::<usize>().map_err(|e| Gf2Error::Parse {
                            line: lineno + 1,
                            msg: format!("bad n in header: {e}"),
                        })?);
                    }
                }
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| match t {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Gf2Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected 0 or 1, found {other:?}"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let m = BitMatrix::from_rows(&rows)?;
        if let Some(n) = header_n {
            if n != m.cols() {
                return Err(Gf2Error::Parse {
                    line: 1,
                    msg: format!("header says n={n} but rows have {} entries", m.cols()),
                });
            }
        }
        Ok(m)
    }
}

/// GF(2) row rank.
pub fn gf2_rank(m: &BitMatrix) -> usize {
    m.clone().rref().len()
}

/// True iff `target` is a GF(2) combination of `columns`. The empty set spans
/// only the zero vector.
pub fn in_span(columns: &[BitVector], target: &BitVector) -> Result<bool, Gf2Error> {
    let len = target.len();
    for c in columns {
        if c.len() != len {
            return Err(Gf2Error::LengthMismatch {
                expected: len,
                actual: c.len(),
            });
        }
    }
    // Echelon basis keyed by leading one.
    let mut basis: Vec<BitVector> = Vec::new();
    let reduce = |basis: &[BitVector], v: &mut BitVector| {
        while let Some(lead) = v.leading_one() {
            match basis.iter().find(|b| b.leading_one() == Some(lead)) {
                Some(b) => v.xor_assign(b),
                None => break,
            }
        }
    };
    for c in columns {
        let mut v = c.clone();
        reduce(&basis, &mut v);
        if !v.is_zero() {
            basis.push(v);
        }
    }
    let mut t = target.clone();
    reduce(&basis, &mut t);
    Ok(t.is_zero())
}

/// Linear basis over vectors of at most 64 bits with canonical reduction.
///
/// After [`XorBasis::reduce`], every pivot bit of the result is zero, so two
/// vectors in the same coset of the span reduce to the same value.
#[derive(Clone, Debug)]
pub struct XorBasis {
    pivots: [u64; 64],
}

impl Default for XorBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl XorBasis {
    pub fn new() -> Self {
        Self { pivots: [0; 64] }
    }

    pub fn clear(&mut self) {
        self.pivots = [0; 64];
    }

    /// Inserts `v`; returns false if it was already in the span.
    pub fn insert(&mut self, mut v: u64) -> bool {
        while v != 0 {
            let b = 63 - v.leading_zeros() as usize;
            if self.pivots[b] == 0 {
                self.pivots[b] = v;
                return true;
            }
            v ^= self.pivots[b];
        }
        false
    }

    pub fn reduce(&self, mut v: u64) -> u64 {
        // pivots[b] has its highest set bit at b, so clearing bit b never
        // disturbs bits above it.
        let mut scan = v;
        while scan != 0 {
            let b = 63 - scan.leading_zeros() as usize;
            if self.pivots[b] != 0 {
                v ^= self.pivots[b];
            }
            scan = v & ((1u64 << b) - 1);
        }
        v
    }

    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }
}
