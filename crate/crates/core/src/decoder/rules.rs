//! Constraint-node update rules.
//!
//! Single-output functions (`*_c2v_*`) take the `n - 1` extrinsic inputs in
//! coordinate order with coordinate `i` skipped. Node-level functions
//! (`*_node_*`) take all `n` incoming messages and write all `n` outgoing
//! messages; output `j` never depends on input `j`.

use crate::channel::Symbol;
use crate::code::LinearCode;
use crate::gf2::XorBasis;
use crate::scalar::Scalar;

use super::{DecodeError, GcRule};

/// Variable-to-constraint message: channel LLR plus the C2V messages from
/// every other neighboring node.
pub fn v2c_awgn<T: Scalar>(channel: T, other_c2v: &[T]) -> T {
    other_c2v.iter().fold(channel, |acc, &m| acc + m)
}

/// BEC variable-to-constraint message: erased only if the channel symbol and
/// every other incoming C2V message are erased.
pub fn v2c_bec(channel: Symbol, other_c2v: &[Symbol]) -> Result<Symbol, DecodeError> {
    let mut value = Symbol::Erased;
    for &s in std::iter::once(&channel).chain(other_c2v) {
        if s.is_erased() {
            continue;
        }
        if !value.is_erased() && value != s {
            return Err(DecodeError::Anomaly("conflicting V2C contributors".into()));
        }
        value = s;
    }
    Ok(value)
}

/// `2 atanh(tanh(a/2) tanh(b/2))` in the stable form
/// `sign(a) sign(b) min(|a|, |b|) + ln(1 + e^-|a+b|) - ln(1 + e^-|a-b|)`.
/// Infinite inputs act as the identity.
pub fn boxplus<T: Scalar>(a: T, b: T) -> T {
    if a.is_infinite() {
        return if a > T::zero() { b } else { -b };
    }
    if b.is_infinite() {
        return if b > T::zero() { a } else { -a };
    }
    let sign = |x: T| if x > T::zero() { T::one() } else if x < T::zero() { -T::one() } else { T::zero() };
    sign(a) * sign(b) * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p()
        - (-(a - b).abs()).exp().ln_1p()
}

/// Single parity check: `2 atanh(prod tanh(L/2))`.
pub fn spc_c2v_awgn<T: Scalar>(incoming: &[T]) -> T {
    incoming.iter().fold(T::infinity(), |acc, &l| boxplus(acc, l))
}

/// All outputs of a single parity check by forward/backward accumulation.
pub fn spc_node_awgn<T: Scalar>(v2c: &[T], out: &mut [T], scratch: &mut Vec<T>) {
    let n = v2c.len();
    // scratch[j] holds the combination of inputs 0..j.
    scratch.clear();
    let mut acc = T::infinity();
    for &l in v2c {
        scratch.push(acc);
        acc = boxplus(acc, l);
    }
    let mut suffix = T::infinity();
    for j in (0..n).rev() {
        out[j] = boxplus(scratch[j], suffix);
        suffix = boxplus(suffix, v2c[j]);
    }
}

fn log_sum_exp<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> T {
    let max = values.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<T>().ln()
}

/// APP extrinsic LLR to coordinate `i` of a generalized node.
///
/// Exact: `ln sum_{c_i=0} exp(-S(c)) - ln sum_{c_i=1} exp(-S(c))` with
/// `S(c) = sum_{j != i} c_j L_j`. Min: `min_{c_i=1} S - min_{c_i=0} S`.
pub fn gc_c2v_awgn<T: Scalar>(code: &LinearCode, incoming: &[T], i: usize, rule: GcRule) -> T {
    let n = code.n();
    debug_assert_eq!(incoming.len(), n - 1);
    let words = code.codewords().expect("subcode must be enumerable");
    let metric = |c: u64| -> T {
        (0..n)
            .filter(|&j| j != i && (c >> j) & 1 == 1)
            .map(|j| incoming[if j < i { j } else { j - 1 }])
            .sum()
    };
    let zero = words.iter().filter(|&&c| (c >> i) & 1 == 0).map(|&c| metric(c));
    let one = words.iter().filter(|&&c| (c >> i) & 1 == 1).map(|&c| metric(c));
    match rule {
        GcRule::Exact => log_sum_exp(zero.map(|s| -s)) - log_sum_exp(one.map(|s| -s)),
        GcRule::Min => {
            one.fold(T::infinity(), T::min) - zero.fold(T::infinity(), T::min)
        }
    }
}

/// All APP outputs of a generalized node.
///
/// `metrics` is scratch space for the per-codeword sums `M(c) = sum_j c_j L_j`;
/// the extrinsic sum for coordinate `i` is `M(c) - c_i L_i`.
pub fn gc_node_awgn<T: Scalar>(
    code: &LinearCode,
    v2c: &[T],
    out: &mut [T],
    rule: GcRule,
    metrics: &mut Vec<T>,
) {
    let n = code.n();
    let words = code.codewords().expect("subcode must be enumerable");
    metrics.clear();
    metrics.extend(words.iter().map(|&c| {
        let mut s = T::zero();
        let mut w = c;
        while w != 0 {
            s = s + v2c[w.trailing_zeros() as usize];
            w &= w - 1;
        }
        s
    }));
    match rule {
        GcRule::Min => {
            for i in 0..n {
                let mut m0 = T::infinity();
                let mut m1 = T::infinity();
                for (&c, &m) in words.iter().zip(metrics.iter()) {
                    if (c >> i) & 1 == 1 {
                        m1 = m1.min(m);
                    } else {
                        m0 = m0.min(m);
                    }
                }
                out[i] = (m1 - v2c[i]) - m0;
            }
        }
        GcRule::Exact => {
            for i in 0..n {
                let li = v2c[i];
                let ext = |c: u64, m: T| if (c >> i) & 1 == 1 { m - li } else { m };
                let mut max0 = T::neg_infinity();
                let mut max1 = T::neg_infinity();
                for (&c, &m) in words.iter().zip(metrics.iter()) {
                    let v = -ext(c, m);
                    if (c >> i) & 1 == 1 {
                        max1 = max1.max(v);
                    } else {
                        max0 = max0.max(v);
                    }
                }
                let mut sum0 = T::zero();
                let mut sum1 = T::zero();
                for (&c, &m) in words.iter().zip(metrics.iter()) {
                    let v = -ext(c, m);
                    if (c >> i) & 1 == 1 {
                        sum1 = sum1 + (v - max1).exp();
                    } else {
                        sum0 = sum0 + (v - max0).exp();
                    }
                }
                out[i] = (max0 + sum0.ln()) - (max1 + sum1.ln());
            }
        }
    }
}

/// Single parity check on the BEC: erased if any other input is erased,
/// otherwise the XOR of the others.
pub fn spc_node_bec(v2c: &[Symbol], out: &mut [Symbol]) {
    let mut erased = 0usize;
    let mut erased_at = 0usize;
    let mut parity = 0u8;
    for (j, s) in v2c.iter().enumerate() {
        match s.bit() {
            Some(b) => parity ^= b,
            None => {
                erased += 1;
                erased_at = j;
            }
        }
    }
    for (j, o) in out.iter_mut().enumerate() {
        *o = match erased {
            0 => Symbol::from_bit(parity ^ v2c[j].bit().unwrap_or(0)),
            1 if erased_at == j => Symbol::from_bit(parity),
            _ => Symbol::Erased,
        };
    }
}

/// Output for coordinate `i` given the erased set and the syndrome of the
/// known inputs other than `i`, both relative to the node's parity-check
/// columns. Uses the span test: the output is determined iff `h_i` is not in
/// the span of the erased columns.
fn bec_output(
    basis: &XorBasis,
    h_i: u64,
    known_syndrome: u64,
) -> Result<Symbol, DecodeError> {
    let h_red = basis.reduce(h_i);
    let s_red = basis.reduce(known_syndrome);
    if h_red == 0 {
        if s_red != 0 {
            return Err(DecodeError::Anomaly(
                "BEC node inputs are inconsistent with every codeword".into(),
            ));
        }
        Ok(Symbol::Erased)
    } else if s_red == 0 {
        Ok(Symbol::Zero)
    } else if s_red == h_red {
        Ok(Symbol::One)
    } else {
        Err(DecodeError::Anomaly(
            "BEC node inputs are inconsistent with every codeword".into(),
        ))
    }
}

/// APP output on the BEC for coordinate `i` (inputs skip `i`).
pub fn gc_c2v_bec(code: &LinearCode, incoming: &[Symbol], i: usize) -> Result<Symbol, DecodeError> {
    let n = code.n();
    debug_assert_eq!(incoming.len(), n - 1);
    let mut basis = XorBasis::new();
    let mut syndrome = 0u64;
    for (idx, s) in incoming.iter().enumerate() {
        let j = if idx < i { idx } else { idx + 1 };
        match s.bit() {
            Some(1) => syndrome ^= code.h_column(j),
            Some(_) => {}
            None => {
                basis.insert(code.h_column(j));
            }
        }
    }
    bec_output(&basis, code.h_column(i), syndrome)
}

/// Reference APP output on the BEC by codeword enumeration: the common value
/// at `i` of every codeword matching the known inputs, or erased if they
/// disagree.
pub fn gc_c2v_bec_by_enumeration(
    code: &LinearCode,
    incoming: &[Symbol],
    i: usize,
) -> Result<Symbol, DecodeError> {
    let words = code.codewords().map_err(|e| DecodeError::Anomaly(e.to_string()))?;
    let consistent = |c: u64| {
        incoming.iter().enumerate().all(|(idx, s)| {
            let j = if idx < i { idx } else { idx + 1 };
            s.bit().is_none_or(|b| ((c >> j) & 1) as u8 == b)
        })
    };
    let mut seen = [false; 2];
    for &c in words.iter().filter(|&&c| consistent(c)) {
        seen[((c >> i) & 1) as usize] = true;
    }
    match seen {
        [true, false] => Ok(Symbol::Zero),
        [false, true] => Ok(Symbol::One),
        [true, true] => Ok(Symbol::Erased),
        [false, false] => Err(DecodeError::Anomaly(
            "no codeword matches the known inputs".into(),
        )),
    }
}

/// All APP outputs of a generalized node on the BEC.
pub fn gc_node_bec(code: &LinearCode, v2c: &[Symbol], out: &mut [Symbol]) -> Result<(), DecodeError> {
    let mut basis_all = XorBasis::new();
    let mut syndrome = 0u64;
    let mut erased_mask = 0u64;
    for (j, s) in v2c.iter().enumerate() {
        match s.bit() {
            Some(1) => syndrome ^= code.h_column(j),
            Some(_) => {}
            None => {
                erased_mask |= 1 << j;
                basis_all.insert(code.h_column(j));
            }
        }
    }
    let mut basis_minus = XorBasis::new();
    for (i, o) in out.iter_mut().enumerate() {
        let h_i = code.h_column(i);
        *o = if (erased_mask >> i) & 1 == 1 {
            basis_minus.clear();
            let mut rest = erased_mask & !(1 << i);
            while rest != 0 {
                basis_minus.insert(code.h_column(rest.trailing_zeros() as usize));
                rest &= rest - 1;
            }
            bec_output(&basis_minus, h_i, syndrome)?
        } else {
            let own = if v2c[i] == Symbol::One { h_i } else { 0 };
            bec_output(&basis_all, h_i, syndrome ^ own)?
        };
    }
    Ok(())
}
