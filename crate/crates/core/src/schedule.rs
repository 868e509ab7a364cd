//! Scheduling sequences: hierarchical distance scheduling, the f-metric,
//! pairwise update-order preferences and baseline orders.
//!
//! Row-level schedules index exponent-matrix rows (0-based internally,
//! 1-based in their text form `"1,3,2,4"`).

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::FromPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::count_ai_bi;
use crate::code::{binomial, LinearCode};
use crate::graph::{row_overlap, ExponentMatrix, GldpcCode};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("cannot parse schedule {0:?}: expected comma-separated 1-based indices")]
    Parse(String),
    #[error("schedule {text:?} is not a permutation of 1..={count}")]
    NotPermutation { text: String, count: usize },
}

/// Distance profile of a constraint node (or of every node of a row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeProfile {
    pub id: usize,
    pub d_min: usize,
    pub a_min: u128,
    pub n: usize,
    pub degree: usize,
}

impl NodeProfile {
    pub fn from_code(id: usize, code: &LinearCode) -> Self {
        Self {
            id,
            d_min: code.d_min(),
            a_min: code.a_min(),
            n: code.n(),
            degree: code.n(),
        }
    }

    pub fn f(&self, n_ab: usize) -> Rational {
        f_metric(self.a_min, self.d_min, self.n, n_ab)
    }
}

/// Symmetric table of shared-variable counts; missing pairs are 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlapTable {
    map: BTreeMap<(usize, usize), usize>,
}

impl OverlapTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    pub fn set(&mut self, a: usize, b: usize, n_ab: usize) {
        self.map.insert(Self::key(a, b), n_ab);
    }

    pub fn get(&self, a: usize, b: usize) -> usize {
        self.map.get(&Self::key(a, b)).copied().unwrap_or(0)
    }

    /// Row-level overlaps: shared block columns between exponent rows.
    pub fn from_rows(exp: &ExponentMatrix) -> Self {
        let mut t = Self::new();
        for a in 0..exp.rows() {
            for b in a + 1..exp.rows() {
                t.set(a, b, row_overlap(exp, a, b));
            }
        }
        t
    }

    /// Node-level overlaps: shared variables between lifted nodes.
    pub fn from_nodes(code: &GldpcCode) -> Self {
        let mut t = Self::new();
        for v in 0..code.n_vars() {
            let nodes = code.var_nodes(v);
            for (x, &a) in nodes.iter().enumerate() {
                for &b in &nodes[x + 1..] {
                    *t.map.entry(Self::key(a, b)).or_insert(0) += 1;
                }
            }
        }
        t
    }
}

fn binom<T: Integer + FromPrimitive>(m: i64, r: i64) -> T {
    T::from_u128(binomial(m, r)).expect("binomial fits the integer type")
}

/// `(n - n_ab) * A_min / C(n, d) * (C(n - 1, d - 1) - C(n - n_ab - 1, d - 1))`
/// in exact rational arithmetic over any integer type.
pub fn f_metric_in<T: Integer + Clone + FromPrimitive>(a_min: u128, d_min: usize, n: usize, n_ab: usize) -> Ratio<T> {
    let (n, d, k) = (n as i64, d_min as i64, n_ab as i64);
    let conv = |x: u128| T::from_u128(x).expect("value fits the integer type");
    let scale = Ratio::new(conv(a_min), binom::<T>(n, d));
    let diff = binom::<T>(n - 1, d - 1) - binom::<T>(n - k - 1, d - 1);
    scale * Ratio::from_integer(conv((n - k).max(0) as u128) * diff)
}

pub fn f_metric(a_min: u128, d_min: usize, n: usize, n_ab: usize) -> Rational {
    f_metric_in::<i128>(a_min, d_min, n, n_ab)
}

/// Hierarchical distance scheduling by insertion: each profile is appended
/// and bubbled left while it has a strictly larger `d_min` than its left
/// neighbor, or an equal `d_min` and a strictly smaller f-metric (using the
/// overlap of that adjacent pair). Returns profile ids.
pub fn hds_schedule(profiles: &[NodeProfile], overlaps: &OverlapTable) -> Vec<usize> {
    let mut order: Vec<&NodeProfile> = Vec::with_capacity(profiles.len());
    for p in profiles {
        order.push(p);
        let mut j = order.len() - 1;
        while j > 0 {
            let (left, right) = (order[j - 1], order[j]);
            let swap = if right.d_min != left.d_min {
                right.d_min > left.d_min
            } else {
                let n_ab = overlaps.get(left.id, right.id);
                left.f(n_ab) > right.f(n_ab)
            };
            if !swap {
                break;
            }
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    order.into_iter().map(|p| p.id).collect()
}

/// Which of two adjacent nodes should be updated first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    AFirst,
    BFirst,
    Indifferent,
}

impl Preference {
    pub fn flipped(self) -> Self {
        match self {
            Preference::AFirst => Preference::BFirst,
            Preference::BFirst => Preference::AFirst,
            Preference::Indifferent => Preference::Indifferent,
        }
    }
}

impl fmt::Display for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preference::AFirst => "a_first",
            Preference::BFirst => "b_first",
            Preference::Indifferent => "indifferent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Bec,
    Awgn,
}

/// Sum over the non-shared coordinates of `A_i - B_i`.
fn awgn_tail_excess(code: &LinearCode, n_ab: usize) -> i128 {
    (n_ab..code.n())
        .map(|i| {
            let (a, b) = count_ai_bi(code, i, n_ab).expect("coordinate in range");
            a as i128 - b as i128
        })
        .sum()
}

/// Update-order preference for adjacent nodes sharing `n_ab` variables.
///
/// Larger `d_min` goes first. On equal `d_min` the BEC rule puts the larger
/// f-metric later and the AWGN rule the larger `sum_{i > n_ab} (A_i - B_i)`.
/// Nodes that share nothing do not interact and are indifferent.
pub fn pairwise_preference(a: &LinearCode, b: &LinearCode, n_ab: usize, channel: ChannelKind) -> Preference {
    if n_ab == 0 {
        return Preference::Indifferent;
    }
    if a.d_min() != b.d_min() {
        return if b.d_min() > a.d_min() {
            Preference::BFirst
        } else {
            Preference::AFirst
        };
    }
    let ordering = match channel {
        ChannelKind::Bec => {
            let pa = NodeProfile::from_code(0, a);
            let pb = NodeProfile::from_code(1, b);
            pa.f(n_ab).cmp(&pb.f(n_ab))
        }
        ChannelKind::Awgn => awgn_tail_excess(a, n_ab).cmp(&awgn_tail_excess(b, n_ab)),
    };
    match ordering {
        std::cmp::Ordering::Greater => Preference::BFirst,
        std::cmp::Ordering::Less => Preference::AFirst,
        std::cmp::Ordering::Equal => Preference::Indifferent,
    }
}

/// Reference orders compared against the scheduling algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Natural,
    Random(u64),
    LowDegree,
}

/// Uniform random permutation of `0..count`.
pub fn random_order<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(rng);
    order
}

/// Row-level baseline order (0-based rows).
pub fn baseline_schedule(kind: Baseline, code: &GldpcCode) -> Vec<usize> {
    let rows = code.row_count();
    match kind {
        Baseline::Natural => (0..rows).collect(),
        Baseline::Random(seed) => random_order(rows, &mut ChaCha8Rng::seed_from_u64(seed)),
        Baseline::LowDegree => {
            let mut order: Vec<usize> = (0..rows).collect();
            order.sort_by_key(|&r| (code.row_degree(r), r));
            order
        }
    }
}

/// One profile per exponent row, taken from that row's subcode.
pub fn row_profiles(code: &GldpcCode) -> Vec<NodeProfile> {
    (0..code.row_count())
        .map(|r| NodeProfile {
            degree: code.row_degree(r),
            ..NodeProfile::from_code(r, code.row_subcode(r))
        })
        .collect()
}

/// Row-level hierarchical distance schedule of a lifted code.
pub fn hds_rows(code: &GldpcCode) -> Vec<usize> {
    let overlaps = code
        .exponent()
        .map(OverlapTable::from_rows)
        .unwrap_or_default();
    hds_schedule(&row_profiles(code), &overlaps)
}

/// Parses `"1,3,2,4"` into 0-based indices forming a permutation of
/// `0..count`.
pub fn parse_order(text: &str, count: usize) -> Result<Vec<usize>, ScheduleError> {
    let parsed: Result<Vec<usize>, _> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect();
    let order: Vec<usize> = parsed
        .map_err(|_| ScheduleError::Parse(text.to_string()))?
        .into_iter()
        .map(|x| x.checked_sub(1).ok_or_else(|| ScheduleError::Parse(text.to_string())))
        .collect::<Result<_, _>>()?;
    let mut seen = vec![false; count];
    let valid = order.len() == count
        && order
            .iter()
            .all(|&x| x < count && !std::mem::replace(&mut seen[x], true));
    if !valid {
        return Err(ScheduleError::NotPermutation {
            text: text.to_string(),
            count,
        });
    }
    Ok(order)
}

/// Formats 0-based indices as `"1,3,2,4"`.
pub fn format_order(order: &[usize]) -> String {
    order
        .iter()
        .map(|x| (x + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::CodeSpec;
    use crate::graph::{fixtures, generalize, lift, AssignmentPolicy};
    use proptest::prelude::*;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn make(spec: CodeSpec) -> LinearCode {
        LinearCode::make(&spec).unwrap()
    }

    fn gr4() -> GldpcCode {
        let exp = fixtures::table(4, 45).unwrap();
        let mut map = BTreeMap::new();
        map.insert(0, Arc::new(make(CodeSpec::ShortenedHamming63)));
        map.insert(2, Arc::new(make(CodeSpec::Hamming74)));
        generalize(&lift(&exp), &map, AssignmentPolicy::Sequential).unwrap()
    }

    #[test]
    fn f_metric_examples() {
        assert_eq!(f_metric(7, 3, 7, 3), Rational::new(48, 5));
        assert_eq!(f_metric(4, 3, 6, 3), Rational::new(27, 5));
        assert_eq!(f_metric(15, 2, 6, 3), Rational::from(9));
        assert_eq!(f_metric(21, 2, 7, 3), Rational::from(12));
        for (a, d, n) in [(7u128, 3, 7), (4, 3, 6), (15, 2, 6), (7, 4, 7)] {
            assert_eq!(f_metric(a, d, n, 0), Rational::from(0));
        }
    }

    #[test]
    fn f_metric_is_generic() {
        assert_eq!(f_metric_in::<i64>(7, 3, 7, 3), Ratio::new(48i64, 5));
        assert_eq!(f_metric_in::<u64>(4, 3, 6, 3), Ratio::new(27u64, 5));
    }

    #[test]
    fn f_metric_matches_ensemble_g_minus_h() {
        use crate::analysis::{g_coeff, h_coeff, Form};
        for c in [LinearCode::spc(6).unwrap(), make(CodeSpec::Hamming74), make(CodeSpec::Simplex73), make(CodeSpec::ShortenedHamming63)] {
            for n_ab in 0..c.n() {
                let sum = (n_ab..c.n()).fold(Rational::from(0), |acc, i| {
                    acc + g_coeff(&c, i, Form::Ensemble).unwrap() - h_coeff(&c, i, n_ab, Form::Ensemble).unwrap()
                });
                assert_eq!(sum, f_metric(c.a_min(), c.d_min(), c.n(), n_ab));
            }
        }
    }

    #[test]
    fn gr4_golden_schedule() {
        let code = gr4();
        let profiles = row_profiles(&code);
        assert_eq!(
            profiles.iter().map(|p| (p.d_min, p.a_min, p.n)).collect::<Vec<_>>(),
            vec![(3, 4, 6), (2, 15, 6), (3, 7, 7), (2, 21, 7)]
        );
        assert_eq!(format_order(&hds_rows(&code)), "1,3,2,4");
    }

    #[test]
    fn hds_trivial_cases() {
        let h = make(CodeSpec::Hamming74);
        let p = NodeProfile::from_code(0, &h);
        assert_eq!(hds_schedule(std::slice::from_ref(&p), &OverlapTable::new()), vec![0]);
        let same: Vec<NodeProfile> = (0..5).map(|id| NodeProfile { id, ..p.clone() }).collect();
        let mut t = OverlapTable::new();
        for a in 0..5 {
            for b in 0..5 {
                t.set(a, b, 2);
            }
        }
        assert_eq!(hds_schedule(&same, &t), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn preference_examples() {
        let spc6 = LinearCode::spc(6).unwrap();
        let h = make(CodeSpec::Hamming74);
        let s = make(CodeSpec::ShortenedHamming63);
        assert_eq!(pairwise_preference(&spc6, &h, 3, ChannelKind::Bec), Preference::BFirst);
        assert_eq!(pairwise_preference(&spc6, &h, 3, ChannelKind::Awgn), Preference::BFirst);
        assert_eq!(pairwise_preference(&h, &h, 0, ChannelKind::Bec), Preference::Indifferent);
        assert_eq!(pairwise_preference(&h, &s, 3, ChannelKind::Bec), Preference::BFirst);
    }

    #[test]
    fn baselines() {
        let code = gr4();
        assert_eq!(baseline_schedule(Baseline::Natural, &code), vec![0, 1, 2, 3]);
        assert_eq!(baseline_schedule(Baseline::LowDegree, &code), vec![0, 1, 2, 3]);
        let r1 = baseline_schedule(Baseline::Random(9), &code);
        assert_eq!(r1, baseline_schedule(Baseline::Random(9), &code));
        let mut sorted = r1.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }

    #[test]
    fn spc_rows_reduce_to_low_degree() {
        // All-SPC rows with equal overlaps: ascending degree.
        let exp = fixtures::table(4, 45).unwrap();
        let code = generalize(&lift(&exp), &BTreeMap::new(), AssignmentPolicy::Sequential).unwrap();
        let profiles = row_profiles(&code);
        let mut t = OverlapTable::new();
        for a in 0..4 {
            for b in 0..4 {
                t.set(a, b, 3);
            }
        }
        assert_eq!(hds_schedule(&profiles, &t), baseline_schedule(Baseline::LowDegree, &code));
        let reversed: Vec<NodeProfile> = profiles.iter().rev().cloned().collect();
        let degrees: Vec<usize> = hds_schedule(&reversed, &t).iter().map(|&r| profiles[r].degree).collect();
        assert_eq!(degrees, vec![6, 6, 7, 7]);
    }

    #[test]
    fn node_overlaps_aggregate_variables() {
        let code = gr4();
        let t = OverlapTable::from_nodes(&code);
        for a in 0..8 {
            for b in 0..code.nodes().len() {
                if a != b {
                    assert_eq!(t.get(a, b), crate::graph::overlap(code.node(a), code.node(b)));
                }
            }
        }
    }

    #[test]
    fn order_text_round_trip() {
        assert_eq!(parse_order("1,3,2,4", 4).unwrap(), vec![0, 2, 1, 3]);
        assert_eq!(parse_order(" 2, 1 ", 2).unwrap(), vec![1, 0]);
        assert_eq!(format_order(&[0, 2, 1, 3]), "1,3,2,4");
        assert!(matches!(parse_order("1,2,2,4", 4), Err(ScheduleError::NotPermutation { .. })));
        assert!(matches!(parse_order("1,2,3", 4), Err(ScheduleError::NotPermutation { .. })));
        assert!(matches!(parse_order("0,1,2,3", 4), Err(ScheduleError::Parse(_))));
        assert!(matches!(parse_order("a,b", 2), Err(ScheduleError::Parse(_))));
    }

    fn arb_profiles() -> impl Strategy<Value = (Vec<NodeProfile>, OverlapTable)> {
        prop::collection::vec((2usize..5, 1u128..40, 0usize..4), 1..9).prop_flat_map(|raw| {
            let count = raw.len();
            let profiles: Vec<NodeProfile> = raw
                .into_iter()
                .enumerate()
                .map(|(id, (d, a, extra))| {
                    let n = d + 3 + extra;
                    NodeProfile { id, d_min: d, a_min: a, n, degree: n }
                })
                .collect();
            (Just(profiles), prop::collection::vec(0usize..4, count * count))
                .prop_map(move |(profiles, ov)| {
                    let mut t = OverlapTable::new();
                    for a in 0..count {
                        for b in a + 1..count {
                            t.set(a, b, ov[a * count + b]);
                        }
                    }
                    (profiles, t)
                })
        })
    }

    proptest! {
        #[test]
        fn hds_is_permutation_sorted_by_distance((profiles, t) in arb_profiles()) {
            let order = hds_schedule(&profiles, &t);
            let mut sorted = order.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..profiles.len()).collect::<Vec<_>>());
            for w in order.windows(2) {
                prop_assert!(profiles[w[0]].d_min >= profiles[w[1]].d_min);
            }
        }

        #[test]
        fn preference_is_antisymmetric(ia in 0usize..5, ib in 0usize..5, n_ab in 0usize..4, awgn in any::<bool>()) {
            let codes = [LinearCode::spc(6).unwrap(), LinearCode::spc(7).unwrap(), make(CodeSpec::Hamming74), make(CodeSpec::Simplex73), make(CodeSpec::ShortenedHamming63)];
            let ch = if awgn { ChannelKind::Awgn } else { ChannelKind::Bec };
            let ab = pairwise_preference(&codes[ia], &codes[ib], n_ab, ch);
            let ba = pairwise_preference(&codes[ib], &codes[ia], n_ab, ch);
            prop_assert_eq!(ab, ba.flipped());
        }

        #[test]
        fn f_metric_nonnegative_and_zero_without_overlap(a in 1u128..50, d in 2usize..6, extra in 0usize..8, k in 0usize..10) {
            let n = d + extra;
            let n_ab = k.min(n);
            prop_assert!(f_metric(a, d, n, n_ab) >= Rational::from(0));
            prop_assert_eq!(f_metric(a, d, n, 0), Rational::from(0));
        }
    }
}
