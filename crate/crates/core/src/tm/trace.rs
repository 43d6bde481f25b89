use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Symbol;
use crate::natural::{decode_bits, is_canonical};

/// One output-tape write: the transition number that emitted it (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    pub step: u64,
    pub symbol: Symbol,
}

/// Everything a run wrote to its output tape, with step indices.
///
/// Shared by the Turing machine interpreter and the cost-model VM.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    /// Input tuple, empty for runs on raw tape words.
    pub args: Vec<BigUint>,
    pub events: Vec<Emission>,
    pub total_steps: u64,
    /// False when the run stopped on its step budget.
    pub halted: bool,
    /// Name of the halting state for Turing machine runs.
    pub halt_state: Option<String>,
}

impl ExecutionTrace {
    pub fn output(&self) -> Vec<Symbol> {
        self.events.iter().map(|e| e.symbol).collect()
    }

    pub fn output_string(&self) -> String {
        self.events.iter().map(|e| e.symbol.to_char()).collect()
    }

    /// Output tape content after `step` transitions.
    pub fn output_at(&self, step: u64) -> Vec<Symbol> {
        self.events.iter().take_while(|e| e.step <= step).map(|e| e.symbol).collect()
    }

    /// Decoded value of the final record, if the run halted on a well-formed
    /// record.
    pub fn final_value(&self) -> Option<BigUint> {
        if !self.halted {
            return None;
        }
        let recs = records(self).ok()?;
        recs.last().filter(|r| r.closed && is_canonical(&r.bits)).map(OutputRecord::value)
    }
}

/// The bits written right of one `#`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// 1-based record number.
    pub index: usize,
    pub open_step: u64,
    pub bits: Vec<bool>,
    pub bit_steps: Vec<u64>,
    /// A later `#` was emitted or the machine halted.
    pub closed: bool,
}

impl OutputRecord {
    pub fn value(&self) -> BigUint {
        decode_bits(&self.bits)
    }

    /// Step at which the record reached its final content.
    pub fn complete_step(&self) -> u64 {
        self.bit_steps.last().copied().unwrap_or(self.open_step)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordViolation {
    #[error("bit emitted at step {step} before the first `#`")]
    BitsBeforeFirstHash { step: u64 },
    #[error("record {index} is closed but empty")]
    EmptyRecord { index: usize },
}

/// Splits the output into records without judging them: bits before the first
/// `#` are dropped and empty records are kept.
pub fn scan_records(trace: &ExecutionTrace) -> Vec<OutputRecord> {
    let mut out: Vec<OutputRecord> = Vec::new();
    for e in &trace.events {
        match e.symbol {
            Symbol::Hash => {
                if let Some(last) = out.last_mut() {
                    last.closed = true;
                }
                out.push(OutputRecord {
                    index: out.len() + 1,
                    open_step: e.step,
                    bits: Vec::new(),
                    bit_steps: Vec::new(),
                    closed: false,
                });
            }
            sym => {
                if let (Some(last), Some(bit)) = (out.last_mut(), sym.as_bit()) {
                    last.bits.push(bit);
                    last.bit_steps.push(e.step);
                }
            }
        }
    }
    if trace.halted {
        if let Some(last) = out.last_mut() {
            last.closed = true;
        }
    }
    out
}

/// Records of a trace. Concatenating `#` and the bits of every record gives
/// back the emitted sequence exactly.
pub fn records(trace: &ExecutionTrace) -> Result<Vec<OutputRecord>, RecordViolation> {
    if let Some(first) = trace.events.first() {
        if first.symbol != Symbol::Hash {
            return Err(RecordViolation::BitsBeforeFirstHash { step: first.step });
        }
    }
    let recs = scan_records(trace);
    if let Some(r) = recs.iter().find(|r| r.closed && r.bits.is_empty()) {
        return Err(RecordViolation::EmptyRecord { index: r.index });
    }
    Ok(recs)
}
