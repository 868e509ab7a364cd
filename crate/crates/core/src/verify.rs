//! Oracle cross-checks run by the `verify` subcommand.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{exact_first_iter_erasure, g_coeff, h_coeff, psum_compare, AnalysisPoint, Form};
use crate::channel::Symbol;
use crate::code::{binomial, CodeSpec, LinearCode};
use crate::decoder::rules::{gc_c2v_awgn, gc_c2v_bec, gc_c2v_bec_by_enumeration, spc_c2v_awgn};
use crate::decoder::GcRule;
use crate::gf2::{gf2_rank, BitMatrix};
use crate::graph::{fixtures, full_parity_check_matrix, generalize, lift, AssignmentPolicy};
use crate::schedule::{f_metric, format_order, hds_rows, pairwise_preference, ChannelKind, Preference};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, failures: Vec<String>, ok: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            ok.into()
        } else {
            failures.join("; ")
        },
    }
}

fn make(spec: CodeSpec) -> LinearCode {
    LinearCode::make(&spec).expect("built-in code")
}

/// The small subcodes used throughout the checks.
pub fn fixture_subcodes() -> Vec<LinearCode> {
    vec![
        LinearCode::spc(6).expect("spc"),
        LinearCode::spc(7).expect("spc"),
        make(CodeSpec::Hamming74),
        make(CodeSpec::Simplex73),
        make(CodeSpec::ShortenedHamming63),
    ]
}

pub fn weight_spectra() -> CheckResult {
    let mut bad = Vec::new();
    let expect = [
        (CodeSpec::Hamming74, vec![1u128, 0, 0, 7, 7, 0, 0, 1]),
        (CodeSpec::Simplex73, vec![1, 0, 0, 0, 7, 0, 0, 0]),
        (CodeSpec::ShortenedHamming63, vec![1, 0, 0, 4, 3, 0, 0]),
    ];
    for (spec, counts) in expect {
        let c = make(spec.clone());
        if c.spectrum().counts != counts {
            bad.push(format!("{spec}: {:?}", c.spectrum().counts));
        }
    }
    for n in 2..=16 {
        let c = LinearCode::spc(n).expect("spc");
        if c.spectrum().counts[2] != binomial(n as i64, 2) {
            bad.push(format!("spc({n}) A_2"));
        }
    }
    check("weight_spectra", bad, "Hamming, Simplex, shortened and SPC spectra")
}

fn all_patterns(len: usize) -> impl Iterator<Item = Vec<Symbol>> {
    (0..3usize.pow(len as u32)).map(move |mut idx| {
        (0..len)
            .map(|_| {
                let s = [Symbol::Zero, Symbol::One, Symbol::Erased][idx % 3];
                idx /= 3;
                s
            })
            .collect()
    })
}

fn compare_bec(code: &LinearCode, pattern: &[Symbol], i: usize) -> Option<String> {
    let fast = gc_c2v_bec(code, pattern, i);
    let slow = gc_c2v_bec_by_enumeration(code, pattern, i);
    let same = match (&fast, &slow) {
        (Ok(a), Ok(b)) => a == b,
        (Err(_), Err(_)) => true,
        _ => false,
    };
    (!same).then(|| format!("{} i={i} {pattern:?}: {fast:?} vs {slow:?}", code.name()))
}

/// Span test against enumeration on erasure patterns of a sampled codeword
/// (all ternary patterns for short codes, random ones for the (15,11) code).
pub fn bec_span_vs_enumeration(random_patterns: usize) -> CheckResult {
    let mut bad = Vec::new();
    let mut checked = 0usize;
    for c in fixture_subcodes() {
        for i in 0..c.n() {
            for pattern in all_patterns(c.n() - 1) {
                checked += 1;
                bad.extend(compare_bec(&c, &pattern, i));
            }
        }
    }
    let big = make(CodeSpec::Hamming1511);
    let words = big.codewords().expect("enumerable").to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(1511);
    for _ in 0..random_patterns {
        let word = words[rng.random_range(0..words.len())];
        let i = rng.random_range(0..big.n());
        let eps: f64 = rng.random();
        let pattern: Vec<Symbol> = (0..big.n())
            .filter(|&j| j != i)
            .map(|j| {
                if rng.random::<f64>() < eps {
                    Symbol::Erased
                } else {
                    Symbol::from_bit(((word >> j) & 1) as u8)
                }
            })
            .collect();
        checked += 1;
        bad.extend(compare_bec(&big, &pattern, i));
    }
    bad.truncate(5);
    check("bec_span_vs_enumeration", bad, format!("{checked} patterns agree"))
}

pub fn exact_app_on_spc(samples: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let n = rng.random_range(2..=8);
        let code = LinearCode::spc(n).expect("spc");
        let llrs: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-20.0..20.0)).collect();
        let i = rng.random_range(0..n);
        let d = (gc_c2v_awgn(&code, &llrs, i, GcRule::Exact) - spc_c2v_awgn(&llrs)).abs();
        worst = worst.max(d);
    }
    let bad = if worst <= 1e-9 {
        vec![]
    } else {
        vec![format!("max deviation {worst:e}")]
    };
    check("exact_app_on_spc", bad, format!("max deviation {worst:.1e} over {samples} samples"))
}

pub fn coefficient_identities() -> CheckResult {
    let mut bad = Vec::new();
    for c in fixture_subcodes() {
        for n_ab in 0..c.n() {
            let mut sum = Rational::from(0);
            for i in n_ab..c.n() {
                sum += g_coeff(&c, i, Form::Ensemble).expect("in range")
                    - h_coeff(&c, i, n_ab, Form::Ensemble).expect("in range");
            }
            if sum != f_metric(c.a_min(), c.d_min(), c.n(), n_ab) {
                bad.push(format!("{} n_ab={n_ab}: ensemble g-h vs f", c.name()));
            }
        }
        for i in 0..c.n() {
            if h_coeff(&c, i, 0, Form::Exact).ok() != g_coeff(&c, i, Form::Exact).ok() {
                bad.push(format!("{} i={i}: h(0) != g", c.name()));
            }
        }
    }
    check("coefficient_identities", bad, "sum of ensemble g - h equals f; h at zero overlap equals g")
}

pub fn erasure_oracle() -> CheckResult {
    let mut bad = Vec::new();
    let h = make(CodeSpec::Hamming74);
    for (e, tol) in [(1e-3, 0.05), (1e-4, 0.01)] {
        let p = exact_first_iter_erasure(&h, 0, &[e; 7]).expect("small code");
        let rel = (p / (3.0 * e * e) - 1.0).abs();
        if rel > tol {
            bad.push(format!("e={e}: relative deviation {rel:.3e}"));
        }
    }
    for c in fixture_subcodes() {
        let e = 1e-4;
        let i = c.n() - 1;
        let p = exact_first_iter_erasure(&c, i, &vec![e; c.n()]).expect("small code");
        let g = g_coeff(&c, i, Form::Exact).expect("in range");
        let g = *g.numer() as f64 / *g.denom() as f64;
        let rel = (p / e.powi(c.d_min() as i32 - 1) / g - 1.0).abs();
        if rel > 0.01 {
            bad.push(format!("{}: {rel:.3e}", c.name()));
        }
    }
    check("erasure_oracle", bad, "first-iteration erasure probability leads with g e^(d-1)")
}

/// Every ordered fixture pair and small overlap: wherever the pairwise rule
/// is strict, the leading-order sums prefer the same order.
pub fn theorem_agreement(epsilon: f64) -> CheckResult {
    let mut bad = Vec::new();
    let mut strict = 0;
    let codes = fixture_subcodes();
    for a in &codes {
        for b in &codes {
            for n_ab in 0..=3 {
                let pref = pairwise_preference(a, b, n_ab, ChannelKind::Bec);
                if pref == Preference::Indifferent {
                    continue;
                }
                strict += 1;
                let rep = psum_compare(a, b, n_ab, AnalysisPoint::Bec { epsilon }).expect("enumerable");
                let numeric = if rep.psum_ab < rep.psum_ba {
                    Preference::AFirst
                } else if rep.psum_ba < rep.psum_ab {
                    Preference::BFirst
                } else {
                    Preference::Indifferent
                };
                if rep.preferred != pref || numeric != pref {
                    bad.push(format!(
                        "{} vs {} n_ab={n_ab}: rule {pref}, sums {} ({numeric})",
                        a.name(),
                        b.name(),
                        rep.preferred
                    ));
                }
            }
        }
    }
    check("theorem_agreement", bad, format!("{strict} strict cases agree"))
}

pub fn golden_schedule() -> CheckResult {
    let exp = fixtures::table(4, 45).expect("fixture");
    let mut map = BTreeMap::new();
    map.insert(0, Arc::new(make(CodeSpec::ShortenedHamming63)));
    map.insert(2, Arc::new(make(CodeSpec::Hamming74)));
    let result = generalize(&lift(&exp), &map, AssignmentPolicy::Sequential).map(|code| format_order(&hds_rows(&code)));
    let bad = match &result {
        Ok(s) if s == "1,3,2,4" => vec![],
        other => vec![format!("got {other:?}")],
    };
    check("golden_schedule", bad, "Table IV schedule is 1,3,2,4")
}

pub fn graph_rank() -> CheckResult {
    let mut bad = Vec::new();
    let exp = fixtures::table(1, 34).expect("fixture");
    let h = Arc::new(make(CodeSpec::Hamming74));
    let map: BTreeMap<_, _> = (0..3).map(|r| (r, Arc::clone(&h))).collect();
    match generalize(&lift(&exp), &map, AssignmentPolicy::Sequential) {
        Ok(code) => {
            if (code.n_vars(), code.rank(), code.k()) != (476, 340, 136) {
                bad.push(format!("N={} rank={} K={}", code.n_vars(), code.rank(), code.k()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                if !code.is_codeword(&code.random_codeword(&mut rng)) {
                    bad.push("sampled word violates a node".into());
                    break;
                }
            }
            let full = full_parity_check_matrix(&code);
            if gf2_rank(&full) != code.rank() {
                bad.push("rank mismatch".into());
            }
        }
        Err(e) => bad.push(e.to_string()),
    }
    let dual_ok = make(CodeSpec::Hamming74)
        .dual()
        .map(|d| d.spectrum() == make(CodeSpec::Simplex73).spectrum())
        .unwrap_or(false);
    if !dual_ok {
        bad.push("dual of Hamming is not the simplex code".into());
    }
    let rank2 = BitMatrix::from_rows(&[[1u8, 1, 0], [0, 1, 1], [1, 0, 1]]).map(|m| gf2_rank(&m));
    if rank2.ok() != Some(2) {
        bad.push("GF(2) rank example".into());
    }
    check("graph_rank", bad, "Table I Hamming code has N=476, rank 340")
}

/// Runs every suite.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        weight_spectra(),
        graph_rank(),
        bec_span_vs_enumeration(10_000),
        exact_app_on_spc(10_000),
        coefficient_identities(),
        erasure_oracle(),
        theorem_agreement(1e-4),
        golden_schedule(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        for r in run_all() {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn display_marks_status() {
        let r = check("x", vec!["broken".into()], "fine");
        assert_eq!(r.to_string(), "FAIL x: broken");
        let r = check("x", vec![], "fine");
        assert_eq!(r.to_string(), "PASS x: fine");
    }
}
