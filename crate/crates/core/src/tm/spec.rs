use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Move, OutputAction, Symbol};

pub type StateId = u32;

/// Largest supported number of work tapes; keys pack one base-4 digit per tape.
pub const MAX_WORK_TAPES: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub next: StateId,
    /// One symbol per work tape (tape 0 is read-only).
    pub writes: Vec<Symbol>,
    /// One move per tape, input tape first.
    pub moves: Vec<Move>,
    pub output: OutputAction,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("machine needs at least one work tape")]
    NoWorkTapes,
    #[error("at most {MAX_WORK_TAPES} work tapes are supported, got {0}")]
    TooManyTapes(usize),
    #[error("no halting state declared")]
    NoHaltingState,
    #[error("unknown state id {0}")]
    UnknownState(StateId),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("transition from halting state `{0}`")]
    TransitionFromHalting(String),
    #[error("two transitions for state `{state}` on `{symbols}`")]
    Nondeterministic { state: String, symbols: String },
    #[error("state `{state}`: expected {expected} {what}, got {got}")]
    Arity { state: String, what: &'static str, expected: usize, got: usize },
    #[error("state `{0}`: blank cannot be emitted")]
    BlankEmit(String),
}

/// A deterministic machine with `work_tapes` read/write tapes plus the input
/// tape. Transitions may be partial; a run that reaches an undefined key
/// stops with [`super::RunError::Stuck`].
#[derive(Debug, Clone)]
pub struct MachineSpec {
    name: String,
    states: Vec<String>,
    start: StateId,
    halting: Vec<bool>,
    work_tapes: usize,
    table: HashMap<(StateId, u32), Transition>,
}

pub(crate) fn pack_key(symbols: &[Symbol]) -> u32 {
    symbols.iter().rev().fold(0u32, |acc, s| acc * 4 + s.index())
}

pub(crate) fn unpack_key(mut key: u32, len: usize) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(Symbol::ALL[(key % 4) as usize]);
        key /= 4;
    }
    out
}

impl MachineSpec {
    /// Builds and validates a machine. `transitions` lists
    /// `(state, symbols read on tapes 0..=k, transition)`.
    pub fn new(
        name: impl Into<String>,
        work_tapes: usize,
        states: Vec<String>,
        start: StateId,
        halting: &[StateId],
        transitions: Vec<(StateId, Vec<Symbol>, Transition)>,
    ) -> Result<Self, SpecError> {
        if work_tapes == 0 {
            return Err(SpecError::NoWorkTapes);
        }
        if work_tapes > MAX_WORK_TAPES {
            return Err(SpecError::TooManyTapes(work_tapes));
        }
        let mut seen = HashMap::new();
        for (idx, s) in states.iter().enumerate() {
            if seen.insert(s.clone(), idx).is_some() {
                return Err(SpecError::DuplicateState(s.clone()));
            }
        }
        let count = states.len() as StateId;
        let check = |id: StateId| if id < count { Ok(()) } else { Err(SpecError::UnknownState(id)) };
        check(start)?;
        if halting.is_empty() {
            return Err(SpecError::NoHaltingState);
        }
        let mut halt_flags = vec![false; states.len()];
        for &h in halting {
            check(h)?;
            halt_flags[h as usize] = true;
        }
        let mut table = HashMap::with_capacity(transitions.len());
        for (state, reads, tr) in transitions {
            check(state)?;
            check(tr.next)?;
            let sname = &states[state as usize];
            if halt_flags[state as usize] {
                return Err(SpecError::TransitionFromHalting(sname.clone()));
            }
            let arity = |what, expected: usize, got: usize| {
                if expected == got {
                    Ok(())
                } else {
                    Err(SpecError::Arity { state: sname.clone(), what, expected, got })
                }
            };
            arity("read symbols", work_tapes + 1, reads.len())?;
            arity("write symbols", work_tapes, tr.writes.len())?;
            arity("moves", work_tapes + 1, tr.moves.len())?;
            if tr.output == OutputAction::Emit(Symbol::Blank) {
                return Err(SpecError::BlankEmit(sname.clone()));
            }
            let key = pack_key(&reads);
            if table.insert((state, key), tr).is_some() {
                return Err(SpecError::Nondeterministic {
                    state: sname.clone(),
                    symbols: reads.iter().map(|s| s.to_char()).collect(),
                });
            }
        }
        Ok(MachineSpec { name: name.into(), states, start, halting: halt_flags, work_tapes, table })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn work_tapes(&self) -> usize {
        self.work_tapes
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|p| p as StateId)
    }

    pub fn is_halting(&self, id: StateId) -> bool {
        self.halting[id as usize]
    }

    pub fn halting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.halting.iter().enumerate().filter(|(_, h)| **h).map(|(i, _)| i as StateId)
    }

    pub fn transition_count(&self) -> usize {
        self.table.len()
    }

    pub fn lookup(&self, state: StateId, reads: &[Symbol]) -> Option<&Transition> {
        self.table.get(&(state, pack_key(reads)))
    }

    pub(crate) fn lookup_packed(&self, state: StateId, key: u32) -> Option<&Transition> {
        self.table.get(&(state, key))
    }

    /// All transitions in a stable order (state id, then packed key).
    pub fn transitions(&self) -> Vec<(StateId, Vec<Symbol>, &Transition)> {
        let mut out: Vec<_> = self
            .table
            .iter()
            .map(|(&(s, key), tr)| (s, key, tr))
            .collect();
        out.sort_by_key(|&(s, key, _)| (s, key));
        out.into_iter()
            .map(|(s, key, tr)| (s, unpack_key(key, self.work_tapes + 1), tr))
            .collect()
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> char) -> String {
    items.iter().map(|x| f(x).to_string()).collect::<Vec<_>>().join(",")
}

/// Writes the machine in the line-oriented machine-file format.
impl fmt::Display for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "machine {}", self.name)?;
        writeln!(f, "tapes {}", self.work_tapes)?;
        writeln!(f, "start {}", self.state_name(self.start))?;
        let halts: Vec<&str> = self.halting_states().map(|h| self.state_name(h)).collect();
        writeln!(f, "halt {}", halts.join(" "))?;
        for (state, reads, tr) in self.transitions() {
            writeln!(
                f,
                "{} {} -> {} {} {} {}",
                self.state_name(state),
                join(&reads, |s| s.to_char()),
                self.state_name(tr.next),
                join(&tr.writes, |s| s.to_char()),
                join(&tr.moves, |m| m.to_char()),
                tr.output.to_char()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(next: StateId, out: OutputAction) -> Transition {
        Transition { next, writes: vec![Symbol::Blank], moves: vec![Move::Stay, Move::Stay], output: out }
    }

    #[test]
    fn key_packing_roundtrips() {
        let syms = vec![Symbol::One, Symbol::Blank, Symbol::Hash];
        assert_eq!(unpack_key(pack_key(&syms), 3), syms);
    }

    #[test]
    fn rejects_transition_from_halting_state() {
        let err = MachineSpec::new(
            "bad",
            1,
            vec!["a".into(), "h".into()],
            0,
            &[1],
            vec![(1, vec![Symbol::One, Symbol::Blank], tr(0, OutputAction::NoEmit))],
        )
        .unwrap_err();
        assert_eq!(err, SpecError::TransitionFromHalting("h".into()));
    }

    #[test]
    fn rejects_blank_emission() {
        let err = MachineSpec::new(
            "bad",
            1,
            vec!["a".into(), "h".into()],
            0,
            &[1],
            vec![(0, vec![Symbol::One, Symbol::Blank], tr(1, OutputAction::Emit(Symbol::Blank)))],
        )
        .unwrap_err();
        assert!(matches!(err, SpecError::BlankEmit(_)));
    }

    #[test]
    fn needs_a_halting_state() {
        let err = MachineSpec::new("bad", 1, vec!["a".into()], 0, &[], vec![]).unwrap_err();
        assert_eq!(err, SpecError::NoHaltingState);
    }
}
