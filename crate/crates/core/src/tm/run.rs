use num_bigint::BigUint;
use thiserror::Error;

use super::spec::{pack_key, MachineSpec, StateId};
use super::trace::{Emission, ExecutionTrace};
use super::{OutputAction, Symbol};
use crate::natural::encode_args;

/// Step limit used when the caller does not pick one.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("step budget must be positive")]
    ZeroBudget,
    #[error("machine `{machine}` has no transition in state `{state}` on `{symbols}` at step {step}")]
    Stuck { machine: String, state: String, symbols: String, step: u64 },
}

/// A two-way infinite tape; cells default to blank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tape {
    right: Vec<Symbol>,
    left: Vec<Symbol>,
    head: i64,
}

impl Tape {
    pub fn with_content(cells: &[Symbol]) -> Tape {
        Tape { right: cells.to_vec(), left: Vec::new(), head: 0 }
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn get(&self, pos: i64) -> Symbol {
        let cell = if pos >= 0 { self.right.get(pos as usize) } else { self.left.get((-pos - 1) as usize) };
        cell.copied().unwrap_or(Symbol::Blank)
    }

    pub fn read(&self) -> Symbol {
        self.get(self.head)
    }

    pub fn write(&mut self, sym: Symbol) {
        let (vec, idx) = if self.head >= 0 {
            (&mut self.right, self.head as usize)
        } else {
            (&mut self.left, (-self.head - 1) as usize)
        };
        if idx >= vec.len() {
            if sym == Symbol::Blank {
                return;
            }
            vec.resize(idx + 1, Symbol::Blank);
        }
        vec[idx] = sym;
    }

    /// True if every cell is blank.
    pub fn is_blank(&self) -> bool {
        self.right.iter().chain(self.left.iter()).all(|&s| s == Symbol::Blank)
    }

    /// Non-blank span rendered left to right, blanks inside shown as `_`.
    pub fn content(&self) -> String {
        let lo = self.left.iter().rposition(|&s| s != Symbol::Blank).map(|p| -(p as i64) - 1);
        let lo = lo.or_else(|| self.right.iter().position(|&s| s != Symbol::Blank).map(|p| p as i64));
        let hi = self.right.iter().rposition(|&s| s != Symbol::Blank).map(|p| p as i64);
        let hi = hi.or_else(|| self.left.iter().position(|&s| s != Symbol::Blank).map(|p| -(p as i64) - 1));
        match (lo, hi) {
            (Some(lo), Some(hi)) => (lo..=hi).map(|p| self.get(p).to_char()).collect(),
            _ => String::new(),
        }
    }

    fn shift(&mut self, delta: i64) {
        self.head += delta;
    }
}

/// Full machine state between steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub state: StateId,
    /// Input tape first, then the work tapes.
    pub tapes: Vec<Tape>,
    pub output: Vec<Symbol>,
    pub steps: u64,
}

pub(crate) enum StepOutcome {
    Moved(Option<Symbol>),
    Halted,
    Stuck,
}

impl Configuration {
    pub fn initial(spec: &MachineSpec, input: &[Symbol]) -> Configuration {
        let mut tapes = Vec::with_capacity(spec.work_tapes() + 1);
        tapes.push(Tape::with_content(input));
        tapes.resize_with(spec.work_tapes() + 1, Tape::default);
        Configuration { state: spec.start(), tapes, output: Vec::new(), steps: 0 }
    }

    pub fn reads(&self) -> Vec<Symbol> {
        self.tapes.iter().map(Tape::read).collect()
    }

    pub(crate) fn step(&mut self, spec: &MachineSpec) -> StepOutcome {
        if spec.is_halting(self.state) {
            return StepOutcome::Halted;
        }
        let key = pack_key(&self.reads());
        let Some(tr) = spec.lookup_packed(self.state, key) else {
            return StepOutcome::Stuck;
        };
        for (tape, &sym) in self.tapes[1..].iter_mut().zip(&tr.writes) {
            tape.write(sym);
        }
        for (tape, mv) in self.tapes.iter_mut().zip(&tr.moves) {
            tape.shift(mv.delta());
        }
        self.state = tr.next;
        self.steps += 1;
        match tr.output {
            OutputAction::Emit(sym) => {
                self.output.push(sym);
                StepOutcome::Moved(Some(sym))
            }
            OutputAction::NoEmit => StepOutcome::Moved(None),
        }
    }
}

/// Runs `spec` on raw tape-0 content and also returns the final configuration.
pub fn run_word_to_end(
    spec: &MachineSpec,
    input: &[Symbol],
    budget: u64,
) -> Result<(ExecutionTrace, Configuration), RunError> {
    if budget == 0 {
        return Err(RunError::ZeroBudget);
    }
    let mut config = Configuration::initial(spec, input);
    let mut events = Vec::new();
    loop {
        if spec.is_halting(config.state) {
            break;
        }
        if config.steps >= budget {
            break;
        }
        match config.step(spec) {
            StepOutcome::Moved(Some(symbol)) => events.push(Emission { step: config.steps, symbol }),
            StepOutcome::Moved(None) => {}
            StepOutcome::Halted => break,
            StepOutcome::Stuck => {
                return Err(RunError::Stuck {
                    machine: spec.name().to_string(),
                    state: spec.state_name(config.state).to_string(),
                    symbols: config.reads().iter().map(|s| s.to_char()).collect(),
                    step: config.steps,
                })
            }
        }
    }
    let halted = spec.is_halting(config.state);
    let trace = ExecutionTrace {
        args: Vec::new(),
        events,
        total_steps: config.steps,
        halted,
        halt_state: halted.then(|| spec.state_name(config.state).to_string()),
    };
    Ok((trace, config))
}

pub fn run_word(spec: &MachineSpec, input: &[Symbol], budget: u64) -> Result<ExecutionTrace, RunError> {
    run_word_to_end(spec, input, budget).map(|(trace, _)| trace)
}

/// Runs on a tuple of naturals written `a#b#...` on tape 0.
pub fn run_args(spec: &MachineSpec, args: &[BigUint], budget: u64) -> Result<ExecutionTrace, RunError> {
    let mut trace = run_word(spec, &encode_args(args), budget)?;
    trace.args = args.to_vec();
    Ok(trace)
}

/// Runs on a single natural input, binary MSB first on tape 0.
pub fn run(spec: &MachineSpec, input: &BigUint, budget: u64) -> Result<ExecutionTrace, RunError> {
    run_args(spec, std::slice::from_ref(input), budget)
}
