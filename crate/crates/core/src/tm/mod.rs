//! Deterministic k-tape Turing machines over `{0, 1, #}` with a one-way
//! output tape.
//!
//! Tape 0 holds the input and is read-only; tapes `1..=k` are work tapes.
//! The output tape is separate: a transition either emits one symbol (the
//! output head advances) or emits nothing. Emitted cells are never revisited.

mod builder;
pub mod glue;
pub mod machines;
mod parse;
mod run;
mod spec;
mod trace;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use builder::{BuildError, MachineBuilder};
pub use parse::{parse_machine, ParseError, ParseErrorKind};
pub use run::{run, run_args, run_word, run_word_to_end, Configuration, RunError, Tape, DEFAULT_BUDGET};
pub use spec::{MachineSpec, SpecError, StateId, Transition};
pub use trace::{records, scan_records, Emission, ExecutionTrace, OutputRecord, RecordViolation};

/// Tape alphabet. `Blank` is the default cell content and can never be emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    Zero,
    One,
    Hash,
    Blank,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::Zero, Symbol::One, Symbol::Hash, Symbol::Blank];

    pub fn from_bit(bit: bool) -> Symbol {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn as_bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            _ => None,
        }
    }

    pub fn is_emittable(self) -> bool {
        self != Symbol::Blank
    }

    pub fn to_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Hash => '#',
            Symbol::Blank => '_',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '#' => Some(Symbol::Hash),
            '_' => Some(Symbol::Blank),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> u32 {
        match self {
            Symbol::Zero => 0,
            Symbol::One => 1,
            Symbol::Hash => 2,
            Symbol::Blank => 3,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Parses a word such as `"0110"` into tape symbols.
pub fn word(text: &str) -> Option<Vec<Symbol>> {
    text.chars().map(Symbol::from_char).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub fn to_char(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
            Move::Stay => 'S',
        }
    }

    pub fn from_char(c: char) -> Option<Move> {
        match c {
            'L' => Some(Move::Left),
            'R' => Some(Move::Right),
            'S' => Some(Move::Stay),
            _ => None,
        }
    }

    pub(crate) fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
            Move::Stay => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutputAction {
    Emit(Symbol),
    NoEmit,
}

impl OutputAction {
    pub fn to_char(self) -> char {
        match self {
            OutputAction::Emit(s) => s.to_char(),
            OutputAction::NoEmit => '-',
        }
    }

    pub fn from_char(c: char) -> Option<OutputAction> {
        match c {
            '-' => Some(OutputAction::NoEmit),
            '_' => None,
            other => Symbol::from_char(other).map(OutputAction::Emit),
        }
    }
}
