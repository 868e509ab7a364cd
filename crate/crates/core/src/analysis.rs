//! First-iteration asymptotics for a pair of adjacent constraint nodes, and
//! the exact enumeration oracles that validate them.
//!
//! Coordinate convention: the `n_ab` variables shared by nodes `a` and `b`
//! occupy the first `n_ab` coordinates of each subcode.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::code::{binomial, CodeError, LinearCode};
use crate::gf2::XorBasis;
use crate::schedule::Preference;
use crate::Rational;

/// Largest code length for the pattern-enumeration oracle.
pub const ORACLE_MAX_LENGTH: usize = 20;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("code length {n} exceeds the oracle limit of {max}")]
    Capacity { n: usize, max: usize },
    #[error("coordinate {i} out of range for length {n}")]
    Coordinate { i: usize, n: usize },
    #[error("overlap {n_ab} exceeds code length {n}")]
    Overlap { n_ab: usize, n: usize },
    #[error("expected {expected} erasure probabilities, got {got}")]
    Probabilities { expected: usize, got: usize },
}

/// Standard normal tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Exact per-position coefficient or the ensemble (coordinate-averaged) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Exact,
    Ensemble,
}

fn check_coordinate(code: &LinearCode, i: usize) -> Result<(), AnalysisError> {
    if i >= code.n() {
        return Err(AnalysisError::Coordinate { i, n: code.n() });
    }
    Ok(())
}

fn check_overlap(code: &LinearCode, n_ab: usize) -> Result<(), AnalysisError> {
    if n_ab > code.n() {
        return Err(AnalysisError::Overlap { n_ab, n: code.n() });
    }
    Ok(())
}

/// `(A_i, B_i)`: minimum-weight codewords with `x_i = 1`, and those among
/// them supported in the non-shared coordinates plus `i`.
pub fn count_ai_bi(code: &LinearCode, i: usize, n_ab: usize) -> Result<(u128, u128), AnalysisError> {
    check_coordinate(code, i)?;
    check_overlap(code, n_ab)?;
    let shared = (1u64 << n_ab) - 1;
    let allowed_shared = shared & (1u64 << i);
    let mut a = 0u128;
    let mut b = 0u128;
    for c in code.min_weight_codewords() {
        if (c >> i) & 1 == 1 {
            a += 1;
            if c & shared & !allowed_shared == 0 {
                b += 1;
            }
        }
    }
    Ok((a, b))
}

fn ensemble_scale(code: &LinearCode) -> Rational {
    let n = code.n() as i64;
    let d = code.d_min() as i64;
    Rational::new(code.a_min() as i128, binomial(n, d) as i128)
}

/// `g(i)`: minimum-weight codewords with `x_i = 1` (exact), or
/// `A_min / C(n, d) * C(n - 1, d - 1)` (ensemble).
pub fn g_coeff(code: &LinearCode, i: usize, form: Form) -> Result<Rational, AnalysisError> {
    check_coordinate(code, i)?;
    match form {
        Form::Exact => Ok(Rational::from(count_ai_bi(code, i, 0)?.0 as i128)),
        Form::Ensemble => {
            let n = code.n() as i64;
            let d = code.d_min() as i64;
            Ok(ensemble_scale(code) * Rational::from(binomial(n - 1, d - 1) as i128))
        }
    }
}

/// `h(j, n_ab)`: minimum-weight codewords with `x_j = 1` whose support avoids
/// the shared coordinates other than `j` (exact), or the ensemble form
/// `A_min / C(n, d) * C(n - n_ab, d - 1)` for shared `j` and
/// `A_min / C(n, d) * C(n - n_ab - 1, d - 1)` otherwise.
pub fn h_coeff(code: &LinearCode, j: usize, n_ab: usize, form: Form) -> Result<Rational, AnalysisError> {
    check_coordinate(code, j)?;
    check_overlap(code, n_ab)?;
    match form {
        Form::Exact => Ok(Rational::from(count_ai_bi(code, j, n_ab)?.1 as i128)),
        Form::Ensemble => {
            let n = code.n() as i64;
            let d = code.d_min() as i64;
            let free = if j < n_ab { n - n_ab as i64 } else { n - n_ab as i64 - 1 };
            Ok(ensemble_scale(code) * Rational::from(binomial(free, d - 1) as i128))
        }
    }
}

/// Leading term of the probability that the extrinsic message to coordinate
/// `i` is in error when every input is iid `N(u, 2u)`: the pair
/// `(A_i, sqrt(d_min u / 2))`, predicting `A_i * Q(sqrt(d_min u / 2))`.
///
/// Summing `d_min - 1` extrinsic inputs gives `Q(sqrt((d_min - 1) u / 2))`
/// for the extrinsic message itself; the `d_min` form is the tail of the
/// a-posteriori value (extrinsic plus the coordinate's own input).
pub fn lemma1_awgn_leading(code: &LinearCode, i: usize, u: f64) -> Result<(u128, f64), AnalysisError> {
    let (a_i, _) = count_ai_bi(code, i, 0)?;
    Ok((a_i, (code.d_min() as f64 * u / 2.0).sqrt()))
}

/// Predicted probability from [`lemma1_awgn_leading`].
pub fn lemma1_awgn_probability(code: &LinearCode, i: usize, u: f64) -> Result<f64, AnalysisError> {
    let (coeff, arg) = lemma1_awgn_leading(code, i, u)?;
    Ok(coeff as f64 * q_function(arg))
}

fn erased_output(code: &LinearCode, i: usize, pattern: u64) -> bool {
    let mut basis = XorBasis::new();
    let mut rest = pattern;
    while rest != 0 {
        basis.insert(code.h_column(rest.trailing_zeros() as usize));
        rest &= rest - 1;
    }
    basis.contains(code.h_column(i))
}

fn oracle_guard(code: &LinearCode, i: usize) -> Result<(), AnalysisError> {
    check_coordinate(code, i)?;
    if code.n() > ORACLE_MAX_LENGTH {
        return Err(AnalysisError::Capacity {
            n: code.n(),
            max: ORACLE_MAX_LENGTH,
        });
    }
    Ok(())
}

/// Every erasure pattern over the coordinates other than `i`.
fn patterns(n: usize, i: usize) -> impl Iterator<Item = u64> {
    let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    (0..1u64 << others.len()).map(move |m| {
        let mut p = 0u64;
        let mut rest = m;
        while rest != 0 {
            p |= 1 << others[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        p
    })
}

/// Exact probability that the first-iteration message to coordinate `i` is
/// erased, given independent input erasure probabilities `eps` (one per
/// coordinate; `eps[i]` is ignored) and all-zero transmission.
pub fn exact_first_iter_erasure(code: &LinearCode, i: usize, eps: &[f64]) -> Result<f64, AnalysisError> {
    oracle_guard(code, i)?;
    if eps.len() != code.n() {
        return Err(AnalysisError::Probabilities {
            expected: code.n(),
            got: eps.len(),
        });
    }
    let total = patterns(code.n(), i)
        .filter(|&p| erased_output(code, i, p))
        .map(|p| {
            (0..code.n())
                .filter(|&k| k != i)
                .map(|k| if (p >> k) & 1 == 1 { eps[k] } else { 1.0 - eps[k] })
                .product::<f64>()
        })
        .sum();
    Ok(total)
}

/// Number of erasure patterns of each size `w` (over the other `n - 1`
/// coordinates) that leave coordinate `i` erased. With iid erasures the
/// erasure probability is `sum_w N_w e^w (1 - e)^(n - 1 - w)`.
pub fn first_iter_erasure_counts(code: &LinearCode, i: usize) -> Result<Vec<u128>, AnalysisError> {
    oracle_guard(code, i)?;
    let mut counts = vec![0u128; code.n()];
    for p in patterns(code.n(), i).filter(|&p| erased_output(code, i, p)) {
        counts[p.count_ones() as usize] += 1;
    }
    Ok(counts)
}

/// Operating point for [`psum_compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalysisPoint {
    /// Vanishing erasure probability.
    Bec { epsilon: f64 },
    /// Mean of the `N(u, 2u)` channel LLRs.
    Awgn { u: f64 },
}

impl AnalysisPoint {
    /// Value of the order-`d` small quantity: `e^d` or `Q(sqrt(d u / 2))`.
    fn order_value(&self, d: usize) -> f64 {
        match *self {
            AnalysisPoint::Bec { epsilon } => epsilon.powi(d as i32),
            AnalysisPoint::Awgn { u } => q_function((d as f64 * u / 2.0).sqrt()),
        }
    }

    /// Common prefactor: `Q(sqrt(u / 2))` for the channel message on AWGN.
    fn prefactor(&self) -> f64 {
        match *self {
            AnalysisPoint::Bec { .. } => 1.0,
            AnalysisPoint::Awgn { u } => q_function((u / 2.0).sqrt()),
        }
    }
}

/// Leading-order sums of error probabilities for both update orders.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionReport {
    pub point: AnalysisPoint,
    pub n_ab: usize,
    pub d_a: usize,
    pub d_b: usize,
    /// Per-position coefficients over the non-shared coordinates: `g`/`h`
    /// on the BEC, `A_i`/`B_i` on AWGN.
    pub first_a: Vec<Rational>,
    pub second_a: Vec<Rational>,
    pub first_b: Vec<Rational>,
    pub second_b: Vec<Rational>,
    /// Coefficient of each order `d` in `P_sum`, updating `a` then `b`.
    pub terms_ab: BTreeMap<usize, Rational>,
    pub terms_ba: BTreeMap<usize, Rational>,
    pub psum_ab: f64,
    pub psum_ba: f64,
    pub preferred: Preference,
}

impl PredictionReport {
    /// Smallest order with a nonzero coefficient in either update order.
    pub fn leading_exponent(&self) -> Option<usize> {
        self.terms_ab
            .iter()
            .chain(&self.terms_ba)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&d, _)| d)
            .min()
    }
}

fn tail_sum(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x)
}

fn coefficients(
    code: &LinearCode,
    n_ab: usize,
    point: &AnalysisPoint,
) -> Result<(Vec<Rational>, Vec<Rational>), AnalysisError> {
    check_overlap(code, n_ab)?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for i in n_ab..code.n() {
        match point {
            AnalysisPoint::Bec { .. } => {
                first.push(g_coeff(code, i, Form::Exact)?);
                second.push(h_coeff(code, i, n_ab, Form::Exact)?);
            }
            AnalysisPoint::Awgn { .. } => {
                let (a, b) = count_ai_bi(code, i, n_ab)?;
                first.push(Rational::from(a as i128));
                second.push(Rational::from(b as i128));
            }
        }
    }
    Ok((first, second))
}

/// Leading-order `P_sum` for updating `a` then `b` and the reverse, using
/// exact per-position coefficients. The node updated first contributes its
/// unconstrained count (`g` or `A_i`); the second one only the count whose
/// support avoids the shared coordinates (`h` or `B_i`). The preference
/// compares the two sums order by order (smallest order first), so it is
/// exact in the asymptotic regime; the numeric sums are evaluated at `point`.
pub fn psum_compare(
    a: &LinearCode,
    b: &LinearCode,
    n_ab: usize,
    point: AnalysisPoint,
) -> Result<PredictionReport, AnalysisError> {
    let (first_a, second_a) = coefficients(a, n_ab, &point)?;
    let (first_b, second_b) = coefficients(b, n_ab, &point)?;
    let (d_a, d_b) = (a.d_min(), b.d_min());

    let mut terms_ab = BTreeMap::new();
    *terms_ab.entry(d_a).or_insert_with(Rational::zero) += tail_sum(&first_a);
    *terms_ab.entry(d_b).or_insert_with(Rational::zero) += tail_sum(&second_b);
    let mut terms_ba = BTreeMap::new();
    *terms_ba.entry(d_a).or_insert_with(Rational::zero) += tail_sum(&second_a);
    *terms_ba.entry(d_b).or_insert_with(Rational::zero) += tail_sum(&first_b);

    let evaluate = |terms: &BTreeMap<usize, Rational>| {
        point.prefactor()
            * terms
                .iter()
                .map(|(&d, c)| c.to_f64().unwrap_or(f64::NAN) * point.order_value(d))
                .sum::<f64>()
    };
    let psum_ab = evaluate(&terms_ab);
    let psum_ba = evaluate(&terms_ba);

    let mut preferred = Preference::Indifferent;
    for (d, c_ab) in &terms_ab {
        let c_ba = &terms_ba[d];
        if c_ab != c_ba {
            preferred = if c_ab < c_ba {
                Preference::AFirst
            } else {
                Preference::BFirst
            };
            break;
        }
    }

    Ok(PredictionReport {
        point,
        n_ab,
        d_a,
        d_b,
        first_a,
        second_a,
        first_b,
        second_b,
        terms_ab,
        terms_ba,
        psum_ab,
        psum_ba,
        preferred,
    })
}

fn join(v: &[Rational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_terms(t: &BTreeMap<usize, Rational>) -> String {
    t.iter()
        .map(|(d, c)| format!("{c}@{d}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for PredictionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (channel, param, first, second) = match self.point {
            AnalysisPoint::Bec { epsilon } => ("bec", epsilon, "g", "h"),
            AnalysisPoint::Awgn { u } => ("awgn", u, "A", "B"),
        };
        writeln!(f, "channel={channel}")?;
        writeln!(f, "parameter={param}")?;
        writeln!(f, "n_ab={}", self.n_ab)?;
        writeln!(f, "d_min_a={}", self.d_a)?;
        writeln!(f, "d_min_b={}", self.d_b)?;
        writeln!(f, "{first}_a={}", join(&self.first_a))?;
        writeln!(f, "{second}_a={}", join(&self.second_a))?;
        writeln!(f, "{first}_b={}", join(&self.first_b))?;
        writeln!(f, "{second}_b={}", join(&self.second_b))?;
        if let Some(d) = self.leading_exponent() {
            writeln!(f, "leading_order={d}")?;
        }
        writeln!(f, "terms_ab={}", join_terms(&self.terms_ab))?;
        writeln!(f, "terms_ba={}", join_terms(&self.terms_ba))?;
        writeln!(f, "psum_ab={:e}", self.psum_ab)?;
        writeln!(f, "psum_ba={:e}", self.psum_ba)?;
        write!(f, "preferred={}", self.preferred)
    }
}
