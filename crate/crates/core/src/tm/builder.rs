use std::collections::HashMap;

use thiserror::Error;

use super::spec::{pack_key, MachineSpec, SpecError, StateId, Transition};
use super::{Move, OutputAction, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("rule {rule}: {msg}")]
    Pattern { rule: usize, msg: String },
    #[error("rule {rule} overlaps an earlier rule in state `{state}` on `{symbols}`")]
    Overlap { rule: usize, state: String, symbols: String },
    #[error("no start state")]
    NoStart,
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// Programmatic machine construction with symbol patterns.
///
/// Read patterns use one character per tape (input tape first): a literal
/// `0 1 # _`, `*` for any symbol, `b` for a bit, `x` for any non-blank.
/// Write patterns use one character per work tape: a literal or `=` to keep
/// the symbol that was read. Moves are `L R S`; output is `0 1 #` or `-`.
/// Patterns expand to concrete transitions, so the result is an ordinary
/// [`MachineSpec`].
#[derive(Debug, Clone)]
pub struct MachineBuilder {
    name: String,
    work_tapes: usize,
    states: Vec<String>,
    ids: HashMap<String, StateId>,
    start: Option<StateId>,
    halting: Vec<StateId>,
    table: HashMap<(StateId, u32), (Vec<Symbol>, Transition)>,
    order: Vec<(StateId, u32)>,
    rules: usize,
    error: Option<BuildError>,
}

fn read_options(c: char) -> Option<&'static [Symbol]> {
    use Symbol::*;
    Some(match c {
        '0' => &[Zero],
        '1' => &[One],
        '#' => &[Hash],
        '_' => &[Blank],
        '*' => &[Zero, One, Hash, Blank],
        'b' => &[Zero, One],
        'x' => &[Zero, One, Hash],
        _ => return None,
    })
}

impl MachineBuilder {
    pub fn new(name: impl Into<String>, work_tapes: usize) -> Self {
        MachineBuilder {
            name: name.into(),
            work_tapes,
            states: Vec::new(),
            ids: HashMap::new(),
            start: None,
            halting: Vec::new(),
            table: HashMap::new(),
            order: Vec::new(),
            rules: 0,
            error: None,
        }
    }

    pub fn work_tapes(&self) -> usize {
        self.work_tapes
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.states.len() as StateId;
        self.states.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn start(&mut self, name: &str) -> &mut Self {
        let id = self.state(name);
        self.start = Some(id);
        self
    }

    pub fn halt(&mut self, name: &str) -> &mut Self {
        let id = self.state(name);
        if !self.halting.contains(&id) {
            self.halting.push(id);
        }
        self
    }

    fn fail(&mut self, err: BuildError) {
        if self.error.is_none() {
            self.error = Some(err);
        }
    }

    /// Adds a pattern rule. Overlap with an earlier rule is an error.
    pub fn rule(&mut self, state: &str, reads: &str, next: &str, writes: &str, moves: &str, out: char) -> &mut Self {
        self.add(state, reads, next, writes, moves, out, false)
    }

    /// Like [`rule`](Self::rule) but only fills keys no earlier rule defined.
    pub fn fallback(
        &mut self,
        state: &str,
        reads: &str,
        next: &str,
        writes: &str,
        moves: &str,
        out: char,
    ) -> &mut Self {
        self.add(state, reads, next, writes, moves, out, true)
    }

    /// Adds one concrete transition.
    pub fn concrete(
        &mut self,
        state: StateId,
        reads: Vec<Symbol>,
        next: StateId,
        writes: Vec<Symbol>,
        moves: Vec<Move>,
        output: OutputAction,
    ) -> &mut Self {
        self.rules += 1;
        let key = pack_key(&reads);
        if self.table.contains_key(&(state, key)) {
            let err = BuildError::Overlap {
                rule: self.rules,
                state: self.states[state as usize].clone(),
                symbols: reads.iter().map(|s| s.to_char()).collect(),
            };
            self.fail(err);
            return self;
        }
        self.order.push((state, key));
        self.table.insert((state, key), (reads, Transition { next, writes, moves, output }));
        self
    }

    #[allow(clippy::too_many_arguments)]
    fn add(
        &mut self,
        state: &str,
        reads: &str,
        next: &str,
        writes: &str,
        moves: &str,
        out: char,
        lenient: bool,
    ) -> &mut Self {
        self.rules += 1;
        let rule = self.rules;
        let k = self.work_tapes;
        let pattern = |msg: String| BuildError::Pattern { rule, msg };
        let read_sets: Option<Vec<&[Symbol]>> = reads.chars().map(read_options).collect();
        let Some(read_sets) = read_sets.filter(|v| v.len() == k + 1) else {
            self.fail(pattern(format!("bad read pattern `{reads}`")));
            return self;
        };
        let write_chars: Vec<char> = writes.chars().collect();
        if write_chars.len() != k || write_chars.iter().any(|&c| c != '=' && Symbol::from_char(c).is_none()) {
            self.fail(pattern(format!("bad write pattern `{writes}`")));
            return self;
        }
        let mv: Option<Vec<Move>> = moves.chars().map(Move::from_char).collect();
        let Some(mv) = mv.filter(|v| v.len() == k + 1) else {
            self.fail(pattern(format!("bad moves `{moves}`")));
            return self;
        };
        let Some(output) = OutputAction::from_char(out) else {
            self.fail(pattern(format!("bad output `{out}`")));
            return self;
        };
        let from = self.state(state);
        let to = self.state(next);

        let mut combos: Vec<Vec<Symbol>> = vec![Vec::new()];
        for set in &read_sets {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    set.iter().map(move |&s| {
                        let mut v = prefix.clone();
                        v.push(s);
                        v
                    })
                })
                .collect();
        }
        for combo in combos {
            let key = pack_key(&combo);
            if self.table.contains_key(&(from, key)) {
                if lenient {
                    continue;
                }
                let err = BuildError::Overlap {
                    rule,
                    state: state.to_string(),
                    symbols: combo.iter().map(|s| s.to_char()).collect(),
                };
                self.fail(err);
                return self;
            }
            let w: Vec<Symbol> = write_chars
                .iter()
                .enumerate()
                .map(|(t, &c)| if c == '=' { combo[t + 1] } else { Symbol::from_char(c).unwrap() })
                .collect();
            self.order.push((from, key));
            self.table
                .insert((from, key), (combo, Transition { next: to, writes: w, moves: mv.clone(), output }));
        }
        self
    }

    pub fn build(&self) -> Result<MachineSpec, BuildError> {
        if let Some(err) = &self.error {
            return Err(err.clone());
        }
        let start = self.start.ok_or(BuildError::NoStart)?;
        let transitions = self
            .order
            .iter()
            .map(|k| {
                let (reads, tr) = &self.table[k];
                (k.0, reads.clone(), tr.clone())
            })
            .collect();
        Ok(MachineSpec::new(self.name.clone(), self.work_tapes, self.states.clone(), start, &self.halting, transitions)?)
    }
}
