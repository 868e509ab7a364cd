//! Binary linear block codes used as constraint-node subcodes.
//!
//! Codewords are `u64` masks (bit `j` = coordinate `j`), so code length is
//! capped at 64. Codeword enumeration is capped at dimension
//! [`ENUMERATION_CAP`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gf2::{BitMatrix, Gf2Error};

/// Largest dimension for which codewords are enumerated.
pub const ENUMERATION_CAP: usize = 16;
/// Largest supported code length (codewords are `u64` masks).
pub const MAX_LENGTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("dimension {k} exceeds the enumeration cap of {cap}")]
    Capacity { k: usize, cap: usize },
    #[error("code length {0} is outside 2..={MAX_LENGTH}")]
    Length(usize),
    #[error("parity-check matrix has an all-zero column at coordinate {0}")]
    ZeroColumn(usize),
    #[error("code has no nonzero codewords")]
    Trivial,
    #[error("code has no parity constraints (rank 0)")]
    Unconstrained,
    #[error("unknown code family {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Matrix(#[from] Gf2Error),
}

/// `C(m, r)`, defined as zero when `m < r`, `m < 0` or `r < 0`.
pub fn binomial(m: i64, r: i64) -> u128 {
    if m < 0 || r < 0 || m < r {
        return 0;
    }
    let r = r.min(m - r) as u128;
    let m = m as u128;
    (0..r).fold(1u128, |acc, i| acc * (m - i) / (i + 1))
}

/// Named code families available to configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSpec {
    Spc(usize),
    Hamming74,
    Simplex73,
    ShortenedHamming63,
    Hamming1511,
    ShortenedHamming1410,
    Explicit(BitMatrix),
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Spc(n) => write!(f, "spc({n})"),
            CodeSpec::Hamming74 => f.write_str("hamming_7_4"),
            CodeSpec::Simplex73 => f.write_str("simplex_7_3"),
            CodeSpec::ShortenedHamming63 => f.write_str("shortened_hamming_6_3"),
            CodeSpec::Hamming1511 => f.write_str("hamming_15_11"),
            CodeSpec::ShortenedHamming1410 => f.write_str("shortened_hamming_14_10"),
            CodeSpec::Explicit(h) => write!(f, "explicit({}x{})", h.rows(), h.cols()),
        }
    }
}

impl FromStr for CodeSpec {
    type Err = CodeError;

    /// Parses the named families; `explicit` matrices are loaded by the caller.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("spc(").and_then(|r| r.strip_suffix(')')) {
            let n = inner
                .trim()
                .parse()
                .map_err(|_| CodeError::UnknownFamily(s.to_string()))?;
            return Ok(CodeSpec::Spc(n));
        }
        match s {
            "hamming_7_4" => Ok(CodeSpec::Hamming74),
            "simplex_7_3" => Ok(CodeSpec::Simplex73),
            "shortened_hamming_6_3" => Ok(CodeSpec::ShortenedHamming63),
            "hamming_15_11" => Ok(CodeSpec::Hamming1511),
            "shortened_hamming_14_10" => Ok(CodeSpec::ShortenedHamming1410),
            _ => Err(CodeError::UnknownFamily(s.to_string())),
        }
    }
}

/// Weight distribution `A_0..=A_n` with the minimum-distance summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSpectrum {
    pub counts: Vec<u128>,
    pub d_min: usize,
    pub a_min: u128,
}

impl WeightSpectrum {
    fn from_counts(counts: Vec<u128>) -> Result<Self, CodeError> {
        let d_min = (1..counts.len())
            .find(|&w| counts[w] > 0)
            .ok_or(CodeError::Trivial)?;
        Ok(Self {
            a_min: counts[d_min],
            d_min,
            counts,
        })
    }
}

#[derive(Clone)]
pub struct LinearCode {
    name: String,
    n: usize,
    k: usize,
    h: BitMatrix,
    h_cols: Vec<u64>,
    generator: Vec<u64>,
    is_spc: bool,
    codewords: Option<Vec<u64>>,
    spectrum: WeightSpectrum,
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearCode")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("k", &self.k)
            .field("d_min", &self.spectrum.d_min)
            .field("a_min", &self.spectrum.a_min)
            .finish()
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.h == other.h
    }
}

fn hamming_columns(m: usize) -> BitMatrix {
    // Column j holds j+1 with the most significant bit in row 0.
    let n = (1usize << m) - 1;
    let mut h = BitMatrix::zeros(m, n).expect("non-empty");
    for c in 0..n {
        let v = c + 1;
        for r in 0..m {
            h.set(r, c, (v >> (m - 1 - r)) & 1 == 1);
        }
    }
    h
}

fn delete_column(h: &BitMatrix, col: usize) -> BitMatrix {
    let mut out = BitMatrix::zeros(h.rows(), h.cols() - 1).expect("non-empty");
    for r in 0..h.rows() {
        for (dst, c) in (0..h.cols()).filter(|&c| c != col).enumerate() {
            out.set(r, dst, h.get(r, c));
        }
    }
    out
}

impl LinearCode {
    /// Builds the code with parity-check matrix `h`, normalising `h` to full
    /// row rank. Zero columns are rejected.
    pub fn from_parity_check(name: impl Into<String>, h: &BitMatrix) -> Result<Self, CodeError> {
        let n = h.cols();
        if !(2..=MAX_LENGTH).contains(&n) {
            return Err(CodeError::Length(n));
        }
        if let Some(c) = (0..n).find(|&c| (0..h.rows()).all(|r| !h.get(r, c))) {
            return Err(CodeError::ZeroColumn(c));
        }
        let h = h.independent_rows().ok_or(CodeError::Unconstrained)?;
        let k = n - h.rows();
        if k == 0 {
            return Err(CodeError::Trivial);
        }
        let h_cols = (0..n).map(|c| h.column_mask(c)).collect();
        let generator: Vec<u64> = h
            .nullspace_basis()
            .iter()
            .map(|v| {
                (0..n).fold(0u64, |acc, j| acc | ((v.get(j) as u64) << j))
            })
            .collect();
        debug_assert_eq!(generator.len(), k);
        let is_spc = h.rows() == 1 && (0..n).all(|c| h.get(0, c));

        let (codewords, spectrum) = if is_spc {
            // Even-weight vectors: A_w = C(n, w) for even w.
            let counts = (0..=n)
                .map(|w| if w % 2 == 0 { binomial(n as i64, w as i64) } else { 0 })
                .collect();
            let words = (k <= ENUMERATION_CAP).then(|| enumerate(&generator));
            (words, WeightSpectrum::from_counts(counts)?)
        } else {
            if k > ENUMERATION_CAP {
                return Err(CodeError::Capacity {
                    k,
                    cap: ENUMERATION_CAP,
                });
            }
            let words = enumerate(&generator);
            let mut counts = vec![0u128; n + 1];
            for &c in &words {
                counts[c.count_ones() as usize] += 1;
            }
            (Some(words), WeightSpectrum::from_counts(counts)?)
        };

        Ok(Self {
            name: name.into(),
            n,
            k,
            h,
            h_cols,
            generator,
            is_spc,
            codewords,
            spectrum,
        })
    }

    pub fn spc(n: usize) -> Result<Self, CodeError> {
        if !(2..=MAX_LENGTH).contains(&n) {
            return Err(CodeError::Length(n));
        }
        let h = BitMatrix::from_rows(&[vec![1u8; n]])?;
        Self::from_parity_check(format!("spc({n})"), &h)
    }

    pub fn make(spec: &CodeSpec) -> Result<Self, CodeError> {
        let name = spec.to_string();
        match spec {
            CodeSpec::Spc(n) => Self::spc(*n),
            CodeSpec::Hamming74 => Self::from_parity_check(name, &hamming_columns(3)),
            CodeSpec::Simplex73 => {
                let hamming = Self::from_parity_check("hamming_7_4", &hamming_columns(3))?;
                Self::from_parity_check(name, &hamming.generator_matrix())
            }
            CodeSpec::ShortenedHamming63 => {
                // The all-one column is the last one in lexicographic order.
                Self::from_parity_check(name, &delete_column(&hamming_columns(3), 6))
            }
            CodeSpec::Hamming1511 => Self::from_parity_check(name, &hamming_columns(4)),
            CodeSpec::ShortenedHamming1410 => {
                Self::from_parity_check(name, &delete_column(&hamming_columns(4), 14))
            }
            CodeSpec::Explicit(h) => Self::from_parity_check(name, h),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_spc(&self) -> bool {
        self.is_spc
    }

    /// Full-rank parity-check matrix, `(n - k) x n`.
    pub fn parity_check(&self) -> &BitMatrix {
        &self.h
    }

    /// Column `j` of the parity-check matrix as an `(n - k)`-bit mask.
    pub fn h_column(&self, j: usize) -> u64 {
        self.h_cols[j]
    }

    pub fn h_columns(&self) -> &[u64] {
        &self.h_cols
    }

    /// Generator basis as codeword masks.
    pub fn generator(&self) -> &[u64] {
        &self.generator
    }

    pub fn generator_matrix(&self) -> BitMatrix {
        let mut g = BitMatrix::zeros(self.k, self.n).expect("k >= 1");
        for (r, &row) in self.generator.iter().enumerate() {
            for c in 0..self.n {
                g.set(r, c, (row >> c) & 1 == 1);
            }
        }
        g
    }

    pub fn dual(&self) -> Result<Self, CodeError> {
        Self::from_parity_check(format!("dual({})", self.name), &self.generator_matrix())
    }

    pub fn is_codeword(&self, word: u64) -> bool {
        let mut syndrome = 0u64;
        let mut w = word;
        while w != 0 {
            let j = w.trailing_zeros() as usize;
            syndrome ^= self.h_cols[j];
            w &= w - 1;
        }
        syndrome == 0
    }

    /// All `2^k` codewords in message-counter order: word `m` is the XOR of
    /// the generator rows selected by the bits of `m`.
    pub fn codewords(&self) -> Result<&[u64], CodeError> {
        self.codewords.as_deref().ok_or(CodeError::Capacity {
            k: self.k,
            cap: ENUMERATION_CAP,
        })
    }

    pub fn spectrum(&self) -> &WeightSpectrum {
        &self.spectrum
    }

    pub fn d_min(&self) -> usize {
        self.spectrum.d_min
    }

    pub fn a_min(&self) -> u128 {
        self.spectrum.a_min
    }

    /// Minimum-weight codewords. SPC codes beyond the enumeration cap are
    /// generated directly as weight-2 pairs.
    pub fn min_weight_codewords(&self) -> Vec<u64> {
        match &self.codewords {
            Some(words) => words
                .iter()
                .copied()
                .filter(|c| c.count_ones() as usize == self.spectrum.d_min)
                .collect(),
            None => {
                debug_assert!(self.is_spc);
                let mut out = Vec::new();
                for a in 0..self.n {
                    for b in a + 1..self.n {
                        out.push((1u64 << a) | (1u64 << b));
                    }
                }
                out
            }
        }
    }
}

fn enumerate(generator: &[u64]) -> Vec<u64> {
    let k = generator.len();
    let mut words = vec![0u64; 1 << k];
    for m in 1usize..(1 << k) {
        words[m] = words[m & (m - 1)] ^ generator[m.trailing_zeros() as usize];
    }
    words
}

/// Codewords of `code`, or a capacity error when `k` exceeds the cap.
pub fn enumerate_codewords(code: &LinearCode) -> Result<Vec<u64>, CodeError> {
    code.codewords().map(|w| w.to_vec())
}

/// `(spectrum, d_min, A_min)`.
pub fn weight_enumerator(code: &LinearCode) -> Result<(Vec<u128>, usize, u128), CodeError> {
    if code.codewords.is_none() && !code.is_spc {
        return Err(CodeError::Capacity {
            k: code.k,
            cap: ENUMERATION_CAP,
        });
    }
    let s = code.spectrum();
    Ok((s.counts.clone(), s.d_min, s.a_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words_of(code: &LinearCode) -> Vec<u64> {
        let mut w = enumerate_codewords(code).unwrap();
        w.sort_unstable();
        w
    }

    #[test]
    fn binomial_convention() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn hamming_parity_check_is_pinned() {
        let code = LinearCode::make(&CodeSpec::Hamming74).unwrap();
        let pinned: BitMatrix = "0 0 0 1 1 1 1\n0 1 1 0 0 1 1\n1 0 1 0 1 0 1\n".parse().unwrap();
        assert_eq!(crate::gf2::gf2_rank(&pinned), 3);
        let other = LinearCode::from_parity_check("pinned", &pinned).unwrap();
        assert_eq!(words_of(&code), words_of(&other));
    }

    #[test]
    fn small_code_enumeration() {
        assert_eq!(words_of(&LinearCode::spc(3).unwrap()), vec![0b000, 0b011, 0b101, 0b110]);
        let rep = LinearCode::from_parity_check(
            "rep3",
            &BitMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1]]).unwrap(),
        )
        .unwrap();
        assert_eq!(words_of(&rep), vec![0b000, 0b111]);
    }

    #[test]
    fn spectra() {
        let h = LinearCode::make(&CodeSpec::Hamming74).unwrap();
        assert_eq!(h.spectrum().counts, vec![1, 0, 0, 7, 7, 0, 0, 1]);
        assert_eq!((h.d_min(), h.a_min()), (3, 7));

        let s = LinearCode::make(&CodeSpec::Simplex73).unwrap();
        assert_eq!(s.spectrum().counts, vec![1, 0, 0, 0, 7, 0, 0, 0]);
        assert_eq!((s.d_min(), s.a_min()), (4, 7));

        let sh = LinearCode::make(&CodeSpec::ShortenedHamming63).unwrap();
        assert_eq!((sh.n(), sh.k()), (6, 3));
        assert_eq!(sh.spectrum().counts, vec![1, 0, 0, 4, 3, 0, 0]);

        let spc6 = LinearCode::spc(6).unwrap();
        assert_eq!((spc6.d_min(), spc6.a_min()), (2, 15));
        let spc7 = LinearCode::spc(7).unwrap();
        assert_eq!((spc7.n(), spc7.k(), spc7.d_min()), (7, 6, 2));

        let h15 = LinearCode::make(&CodeSpec::Hamming1511).unwrap();
        assert_eq!((h15.n(), h15.k(), h15.d_min(), h15.a_min()), (15, 11, 3, 35));
        let h14 = LinearCode::make(&CodeSpec::ShortenedHamming1410).unwrap();
        assert_eq!((h14.n(), h14.k(), h14.d_min()), (14, 10, 3));
    }

    #[test]
    fn shortened_matches_definition() {
        // (7,4) codewords with the all-one coordinate equal to zero, that
        // coordinate deleted.
        let h = LinearCode::make(&CodeSpec::Hamming74).unwrap();
        let mut expected: Vec<u64> = words_of(&h)
            .into_iter()
            .filter(|c| c >> 6 & 1 == 0)
            .collect();
        expected.sort_unstable();
        let sh = LinearCode::make(&CodeSpec::ShortenedHamming63).unwrap();
        assert_eq!(words_of(&sh), expected);
    }

    #[test]
    fn explicit_six_three() {
        let h: BitMatrix = "0 0 0 1 1 1\n0 1 1 0 0 1\n1 0 1 0 1 0\n".parse().unwrap();
        let c = LinearCode::make(&CodeSpec::Explicit(h)).unwrap();
        assert_eq!((c.n(), c.k(), c.d_min()), (6, 3, 3));
    }

    #[test]
    fn malformed_explicit() {
        let h: BitMatrix = "1 0 1\n1 0 0\n".parse().unwrap();
        assert_eq!(LinearCode::from_parity_check("z", &h).unwrap_err(), CodeError::ZeroColumn(1));
        let full: BitMatrix = "1 0\n0 1\n".parse().unwrap();
        assert_eq!(LinearCode::from_parity_check("f", &full).unwrap_err(), CodeError::Trivial);
    }

    #[test]
    fn capacity_errors() {
        let big = LinearCode::spc(20).unwrap();
        assert!(matches!(enumerate_codewords(&big), Err(CodeError::Capacity { .. })));
        // SPC spectra are known in closed form.
        let (spec, d, a) = weight_enumerator(&big).unwrap();
        assert_eq!((d, a), (2, 190));
        assert_eq!(spec.iter().sum::<u128>(), 1 << 19);
        assert_eq!(big.min_weight_codewords().len(), 190);
    }

    #[test]
    fn simplex_is_dual_of_hamming() {
        let h = LinearCode::make(&CodeSpec::Hamming74).unwrap();
        let s = LinearCode::make(&CodeSpec::Simplex73).unwrap();
        for &a in h.codewords().unwrap() {
            for &b in s.codewords().unwrap() {
                assert_eq!((a & b).count_ones() % 2, 0);
            }
        }
        assert_eq!(words_of(&h.dual().unwrap()), words_of(&s));
    }

    fn krawtchouk(n: i64, j: i64, w: i64) -> i128 {
        (0..=j)
            .map(|s| {
                let sign = if s % 2 == 0 { 1 } else { -1 };
                sign * (binomial(w, s) * binomial(n - w, j - s)) as i128
            })
            .sum()
    }

    #[test]
    fn macwilliams_identity_holds() {
        let specs = [
            CodeSpec::Spc(6),
            CodeSpec::Spc(7),
            CodeSpec::Hamming74,
            CodeSpec::Simplex73,
            CodeSpec::ShortenedHamming63,
            CodeSpec::Hamming1511,
            CodeSpec::ShortenedHamming1410,
        ];
        for spec in &specs {
            let code = LinearCode::make(spec).unwrap();
            let dual = code.dual().unwrap();
            let n = code.n() as i64;
            let a = &code.spectrum().counts;
            for j in 0..=n {
                let sum: i128 = (0..=n).map(|w| a[w as usize] as i128 * krawtchouk(n, j, w)).sum();
                assert_eq!(sum % (1i128 << code.k()), 0);
                let predicted = sum >> code.k();
                assert_eq!(predicted, dual.spectrum().counts[j as usize] as i128, "{spec} j={j}");
            }
        }
    }

    #[test]
    fn spectrum_invariants() {
        for spec in [CodeSpec::Hamming74, CodeSpec::Simplex73, CodeSpec::Hamming1511, CodeSpec::Spc(9)] {
            let c = LinearCode::make(&spec).unwrap();
            let s = c.spectrum();
            assert_eq!(s.counts[0], 1);
            assert_eq!(s.counts.iter().sum::<u128>(), 1u128 << c.k());
            assert_eq!(s.a_min, s.counts[s.d_min]);
            assert_eq!(crate::gf2::gf2_rank(c.parity_check()), c.n() - c.k());
        }
    }

    proptest! {
        #[test]
        fn codewords_closed_under_addition(a in 0usize..2048, b in 0usize..2048) {
            let code = LinearCode::make(&CodeSpec::Hamming1511).unwrap();
            let words = code.codewords().unwrap();
            prop_assert!(code.is_codeword(words[a] ^ words[b]));
        }
    }
}
