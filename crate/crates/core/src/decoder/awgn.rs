use crate::channel::Symbol;
use crate::graph::GldpcCode;
use crate::scalar::Scalar;

use super::rules::{gc_node_awgn, spc_node_awgn};
use super::{check_lengths, DecodeError, DecodeOptions, DecodeResult, EdgeLayout, GcRule, Schedule};

/// Reusable soft-decision decoder, generic over the LLR scalar.
///
/// Invariant between node updates: `posterior[v] = L_v + sum of stored C2V
/// messages into v`.
#[derive(Debug, Clone)]
pub struct AwgnDecoder<T: Scalar> {
    layout: EdgeLayout,
    channel: Vec<T>,
    c2v: Vec<T>,
    posterior: Vec<T>,
    v2c: Vec<T>,
    out: Vec<T>,
    scratch: Vec<T>,
    flood_v2c: Vec<T>,
}

impl<T: Scalar> AwgnDecoder<T> {
    pub fn new(code: &GldpcCode) -> Self {
        let layout = EdgeLayout::new(code);
        let edges = layout.vars.len();
        let n = layout.n_vars;
        Self {
            layout,
            channel: vec![T::zero(); n],
            c2v: vec![T::zero(); edges],
            posterior: vec![T::zero(); n],
            v2c: Vec::new(),
            out: Vec::new(),
            scratch: Vec::new(),
            flood_v2c: vec![T::zero(); edges],
        }
    }

    fn node_outputs(&mut self, node: usize, rule: GcRule) {
        let code = &self.layout.codes[node];
        self.out.resize(code.n(), T::zero());
        if code.is_spc() {
            spc_node_awgn(&self.v2c, &mut self.out, &mut self.scratch);
        } else {
            gc_node_awgn(code, &self.v2c, &mut self.out, rule, &mut self.scratch);
        }
    }

    fn update_layered(&mut self, node: usize, rule: GcRule) {
        let range = self.layout.edges(node);
        self.v2c.clear();
        for e in range.clone() {
            let v = self.layout.vars[e];
            self.v2c.push(self.posterior[v] - self.c2v[e]);
        }
        self.node_outputs(node, rule);
        for (j, e) in range.enumerate() {
            let v = self.layout.vars[e];
            self.c2v[e] = self.out[j];
            self.posterior[v] = self.v2c[j] + self.out[j];
        }
    }

    fn iterate_flooding(&mut self, rule: GcRule) {
        for e in 0..self.c2v.len() {
            self.flood_v2c[e] = self.posterior[self.layout.vars[e]] - self.c2v[e];
        }
        for node in 0..self.layout.node_count() {
            let range = self.layout.edges(node);
            self.v2c.clear();
            self.v2c.extend_from_slice(&self.flood_v2c[range.clone()]);
            self.node_outputs(node, rule);
            self.c2v[range].copy_from_slice(&self.out);
        }
        self.posterior.copy_from_slice(&self.channel);
        for (e, &v) in self.layout.vars.iter().enumerate() {
            self.posterior[v] = self.posterior[v] + self.c2v[e];
        }
    }

    pub fn posterior(&self) -> &[T] {
        &self.posterior
    }

    fn decision(&self, v: usize) -> Symbol {
        let p = self.posterior[v];
        if p > T::zero() {
            Symbol::Zero
        } else if p < T::zero() {
            Symbol::One
        } else {
            Symbol::Erased
        }
    }

    fn all_satisfied(&self) -> bool {
        (0..self.layout.node_count()).all(|node| {
            let mut word = 0u64;
            for (j, e) in self.layout.edges(node).enumerate() {
                match self.decision(self.layout.vars[e]) {
                    Symbol::One => word |= 1 << j,
                    Symbol::Zero => {}
                    Symbol::Erased => return false,
                }
            }
            self.layout.codes[node].is_codeword(word)
        })
    }

    pub fn decode(
        &mut self,
        llrs: &[T],
        transmitted: &[u8],
        schedule: &Schedule,
        options: &DecodeOptions,
    ) -> Result<DecodeResult, DecodeError> {
        check_lengths(self.layout.n_vars, llrs.len(), transmitted.len())?;
        schedule.validate(self.layout.node_count())?;
        self.channel.copy_from_slice(llrs);
        self.posterior.copy_from_slice(llrs);
        self.c2v.fill(T::zero());

        let wrong = |dec: &Self| {
            (0..dec.layout.n_vars)
                .filter(|&v| dec.decision(v).bit() != Some(transmitted[v] & 1))
                .count()
        };
        let mut unresolved = Vec::with_capacity(options.max_iterations);
        for _ in 0..options.max_iterations {
            match schedule {
                Schedule::Layered(seq) => {
                    for &node in seq {
                        self.update_layered(node, options.gc_rule);
                    }
                }
                Schedule::Flooding => self.iterate_flooding(options.gc_rule),
            }
            unresolved.push(wrong(self));
            if options.early_stop && self.all_satisfied() {
                break;
            }
        }

        let decisions: Vec<Symbol> = (0..self.layout.n_vars).map(|v| self.decision(v)).collect();
        let success = decisions
            .iter()
            .zip(transmitted)
            .all(|(d, &b)| d.bit() == Some(b & 1));
        Ok(DecodeResult {
            decisions,
            success,
            iterations_used: unresolved.len(),
            unresolved_per_iteration: unresolved,
        })
    }
}
