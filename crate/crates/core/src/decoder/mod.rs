//! Flooding and layered message passing over the BEC and BI-AWGN channel.
//!
//! Layered decoding keeps one stored C2V message per edge plus a per-variable
//! aggregate, and forms each V2C message on demand as aggregate minus the
//! edge's own C2V (BEC: the aggregate with that contributor removed). Each
//! selected node first refreshes the V2C messages on its edges and then
//! replaces its stored C2V messages. Flooding forms every V2C from the
//! previous iteration before any node updates.

mod awgn;
mod bec;
pub mod rules;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

pub use awgn::AwgnDecoder;
pub use bec::BecDecoder;

use crate::channel::{ReceivedWord, Symbol};
use crate::code::LinearCode;
use crate::graph::GldpcCode;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("configuration error: {0}")]
    Config(String),
    /// A state that cannot arise from a valid BEC transmission.
    #[error("decoder anomaly: {0}")]
    Anomaly(String),
}

/// APP rule for generalized nodes on the BI-AWGN channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GcRule {
    /// Log-sum-exp over codewords.
    #[default]
    Exact,
    /// Max-log (min-sum over codewords).
    Min,
}

impl FromStr for GcRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(GcRule::Exact),
            "min" => Ok(GcRule::Min),
            other => Err(format!("unknown gc rule {other:?} (expected exact or min)")),
        }
    }
}

/// Node update order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    Flooding,
    /// Node ids, each exactly once; repeated every iteration.
    Layered(Vec<usize>),
}

impl Schedule {
    /// Expands exponent-row indices (0-based) into their lifted nodes, each
    /// row's nodes in ascending id order.
    pub fn from_rows(code: &GldpcCode, rows: &[usize]) -> Schedule {
        Schedule::Layered(rows.iter().flat_map(|&r| code.row_nodes(r)).collect())
    }

    pub fn natural(code: &GldpcCode) -> Schedule {
        Schedule::Layered((0..code.nodes().len()).collect())
    }

    pub fn validate(&self, node_count: usize) -> Result<(), DecodeError> {
        let Schedule::Layered(seq) = self else {
            return Ok(());
        };
        if seq.len() != node_count {
            return Err(DecodeError::Config(format!(
                "schedule has {} entries but the code has {node_count} nodes",
                seq.len()
            )));
        }
        let mut seen = vec![false; node_count];
        for &id in seq {
            if id >= node_count || std::mem::replace(&mut seen[id], true) {
                return Err(DecodeError::Config(format!(
                    "schedule is not a permutation of the nodes (bad entry {id})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOptions {
    pub max_iterations: usize,
    pub gc_rule: GcRule,
    /// Stop once the hard decisions satisfy every node (BEC: nothing left
    /// erased, or an iteration made no progress).
    pub early_stop: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 3,
            gc_rule: GcRule::Exact,
            early_stop: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Per-bit decision; `Erased` for BEC erasures and for AWGN posteriors
    /// that are exactly zero.
    pub decisions: Vec<Symbol>,
    pub success: bool,
    pub iterations_used: usize,
    /// After each iteration: erased bits (BEC) or wrong-or-undecided bits
    /// (BI-AWGN).
    pub unresolved_per_iteration: Vec<usize>,
}

impl DecodeResult {
    pub fn bit_errors(&self, transmitted: &[u8]) -> usize {
        self.decisions
            .iter()
            .zip(transmitted)
            .filter(|(d, &b)| d.bit() != Some(b & 1))
            .count()
    }
}

/// Edges grouped by node in subcode-coordinate order.
#[derive(Debug, Clone)]
pub(crate) struct EdgeLayout {
    pub starts: Vec<usize>,
    pub vars: Vec<usize>,
    pub codes: Vec<Arc<LinearCode>>,
    pub n_vars: usize,
}

impl EdgeLayout {
    pub fn new(code: &GldpcCode) -> Self {
        let mut starts = Vec::with_capacity(code.nodes().len() + 1);
        let mut vars = Vec::new();
        let mut codes = Vec::with_capacity(code.nodes().len());
        starts.push(0);
        for node in code.nodes() {
            vars.extend(node.coordinate_vars());
            starts.push(vars.len());
            codes.push(Arc::clone(&node.subcode));
        }
        Self {
            starts,
            vars,
            codes,
            n_vars: code.n_vars(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.codes.len()
    }

    pub fn edges(&self, node: usize) -> std::ops::Range<usize> {
        self.starts[node]..self.starts[node + 1]
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Flooding => f.write_str("flooding"),
            Schedule::Layered(seq) => {
                let parts: Vec<String> = seq.iter().map(|v| (v + 1).to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// One-shot decode. `transmitted` is the codeword that was sent; it decides
/// `success` and, on the BEC, is checked against every resolved bit.
pub fn decode<T: Scalar>(
    code: &GldpcCode,
    received: &ReceivedWord<T>,
    transmitted: &[u8],
    schedule: &Schedule,
    options: &DecodeOptions,
) -> Result<DecodeResult, DecodeError> {
    match received {
        ReceivedWord::Bec(symbols) => {
            BecDecoder::new(code).decode(symbols, transmitted, schedule, options)
        }
        ReceivedWord::Awgn(llrs) => {
            AwgnDecoder::<T>::new(code).decode(llrs, transmitted, schedule, options)
        }
    }
}

pub(crate) fn check_lengths(n: usize, received: usize, transmitted: usize) -> Result<(), DecodeError> {
    if received != n || transmitted != n {
        return Err(DecodeError::Config(format!(
            "code has {n} variables but received {received} and transmitted {transmitted} symbols"
        )));
    }
    Ok(())
}
