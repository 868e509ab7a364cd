use crate::channel::Symbol;
use crate::graph::GldpcCode;

use super::rules::{gc_node_bec, spc_node_bec};
use super::{check_lengths, DecodeError, DecodeOptions, DecodeResult, EdgeLayout, Schedule};

/// Reusable BEC decoder. Buffers are sized once per code.
///
/// Per variable it tracks how many contributors (channel plus stored C2V
/// messages) are known and their common value. Any disagreement, or a stored
/// C2V message reverting to an erasure, is reported as an anomaly.
#[derive(Debug, Clone)]
pub struct BecDecoder {
    layout: EdgeLayout,
    c2v: Vec<Symbol>,
    known: Vec<u32>,
    value: Vec<Symbol>,
    v2c: Vec<Symbol>,
    out: Vec<Symbol>,
    pending: Vec<Symbol>,
}

impl BecDecoder {
    pub fn new(code: &GldpcCode) -> Self {
        let layout = EdgeLayout::new(code);
        let edges = layout.vars.len();
        let n = layout.n_vars;
        Self {
            layout,
            c2v: vec![Symbol::Erased; edges],
            known: vec![0; n],
            value: vec![Symbol::Erased; n],
            v2c: Vec::new(),
            out: Vec::new(),
            pending: vec![Symbol::Erased; edges],
        }
    }

    fn reset(&mut self, channel: &[Symbol]) {
        self.c2v.fill(Symbol::Erased);
        for (v, &s) in channel.iter().enumerate() {
            self.known[v] = !s.is_erased() as u32;
            self.value[v] = s;
        }
    }

    #[inline]
    fn v2c_of(&self, edge: usize) -> Symbol {
        let v = self.layout.vars[edge];
        let own = !self.c2v[edge].is_erased() as u32;
        if self.known[v] > own {
            self.value[v]
        } else {
            Symbol::Erased
        }
    }

    fn node_outputs(&mut self, node: usize) -> Result<(), DecodeError> {
        let code = &self.layout.codes[node];
        self.out.resize(code.n(), Symbol::Erased);
        if code.is_spc() {
            spc_node_bec(&self.v2c, &mut self.out);
            Ok(())
        } else {
            gc_node_bec(code, &self.v2c, &mut self.out)
        }
    }

    /// Stores a new C2V message on `edge`, keeping the per-variable tallies.
    fn store(&mut self, edge: usize, new: Symbol) -> Result<(), DecodeError> {
        let old = self.c2v[edge];
        let v = self.layout.vars[edge];
        match (old.is_erased(), new.is_erased()) {
            (true, true) => {}
            (false, true) => {
                return Err(DecodeError::Anomaly(format!(
                    "C2V message to variable {v} reverted to an erasure"
                )))
            }
            (false, false) => {
                if old != new {
                    return Err(DecodeError::Anomaly(format!(
                        "C2V message to variable {v} changed value"
                    )));
                }
            }
            (true, false) => {
                if self.known[v] > 0 && self.value[v] != new {
                    return Err(DecodeError::Anomaly(format!(
                        "conflicting values reach variable {v}"
                    )));
                }
                self.known[v] += 1;
                self.value[v] = new;
            }
        }
        self.c2v[edge] = new;
        Ok(())
    }

    fn update_layered(&mut self, node: usize) -> Result<(), DecodeError> {
        let range = self.layout.edges(node);
        self.v2c.clear();
        for e in range.clone() {
            let m = self.v2c_of(e);
            self.v2c.push(m);
        }
        self.node_outputs(node)?;
        for (j, e) in range.enumerate() {
            let new = self.out[j];
            self.store(e, new)?;
        }
        Ok(())
    }

    fn iterate_flooding(&mut self) -> Result<(), DecodeError> {
        for node in 0..self.layout.node_count() {
            let range = self.layout.edges(node);
            self.v2c.clear();
            for e in range.clone() {
                let m = self.v2c_of(e);
                self.v2c.push(m);
            }
            self.node_outputs(node)?;
            for (j, e) in range.enumerate() {
                self.pending[e] = self.out[j];
            }
        }
        for e in 0..self.pending.len() {
            let new = self.pending[e];
            self.store(e, new)?;
        }
        Ok(())
    }

    fn erased_count(&self) -> usize {
        self.known.iter().filter(|&&k| k == 0).count()
    }

    pub fn decode(
        &mut self,
        channel: &[Symbol],
        transmitted: &[u8],
        schedule: &Schedule,
        options: &DecodeOptions,
    ) -> Result<DecodeResult, DecodeError> {
        check_lengths(self.layout.n_vars, channel.len(), transmitted.len())?;
        schedule.validate(self.layout.node_count())?;
        self.reset(channel);

        let mut unresolved = Vec::with_capacity(options.max_iterations);
        let mut previous = self.erased_count();
        for _ in 0..options.max_iterations {
            match schedule {
                Schedule::Layered(seq) => {
                    for &node in seq {
                        self.update_layered(node)?;
                    }
                }
                Schedule::Flooding => self.iterate_flooding()?,
            }
            let erased = self.erased_count();
            // Resolution is monotone; store() already rejects regressions.
            debug_assert!(erased <= previous);
            unresolved.push(erased);
            if options.early_stop && (erased == 0 || erased == previous) {
                break;
            }
            previous = erased;
        }

        let decisions: Vec<Symbol> = (0..self.layout.n_vars)
            .map(|v| if self.known[v] > 0 { self.value[v] } else { Symbol::Erased })
            .collect();
        for (v, (d, &b)) in decisions.iter().zip(transmitted).enumerate() {
            if let Some(bit) = d.bit() {
                if bit != b & 1 {
                    return Err(DecodeError::Anomaly(format!(
                        "variable {v} resolved to {bit} but {b} was sent"
                    )));
                }
            }
        }
        let success = decisions.iter().all(|d| !d.is_erased());
        Ok(DecodeResult {
            decisions,
            success,
            iterations_used: unresolved.len(),
            unresolved_per_iteration: unresolved,
        })
    }
}
