//! Cost-model virtual machine.
//!
//! Programs are host closures that do their arithmetic through a [`Vm`], which
//! charges every primitive by operand bit length before performing it:
//!
//! | primitive                  | charge            |
//! |----------------------------|-------------------|
//! | add, sub, compare, shift   | total operand bits `w` |
//! | multiply, divide           | `w * v`           |
//! | memory read/write of `w` bits | `w`            |
//! | emit one symbol            | 1                 |
//! | control step               | 1                 |
//! | call of another program    | the callee's own steps |
//!
//! A run produces the same [`ExecutionTrace`] as the Turing machine
//! interpreter, with event steps measured in charged units.
//!
//! Why the numbers transfer: every primitive above can be carried out by a
//! multi-tape Turing machine in time linear in its charge (schoolbook
//! multiplication for `mul`/`div`), and a TM can simulate this VM's control
//! with constant overhead per primitive. So a charged-step count `T(n)` for a
//! program corresponds to a TM running in `O(T(n))` steps up to the usual
//! tape-reduction and speedup factors. Lower-bound claims transfer only as an
//! assumption, and the reports say so.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::combinators::ProgramHandle;
use crate::natural::{bit_len, encode_symbols};
use crate::tm::{Emission, ExecutionTrace, Symbol};

/// One chargeable operation with the sizes that determine its cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Primitive {
    Add { bits: u64 },
    Sub { bits: u64 },
    Cmp { bits: u64 },
    Shift { bits: u64 },
    Mul { lhs: u64, rhs: u64 },
    Div { lhs: u64, rhs: u64 },
    Read { bits: u64 },
    Write { bits: u64 },
    Emit,
    Control,
    Call { steps: u64 },
}

impl Primitive {
    pub fn cost(&self) -> u64 {
        match *self {
            Primitive::Add { bits }
            | Primitive::Sub { bits }
            | Primitive::Cmp { bits }
            | Primitive::Shift { bits }
            | Primitive::Read { bits }
            | Primitive::Write { bits } => bits,
            Primitive::Mul { lhs, rhs } | Primitive::Div { lhs, rhs } => lhs * rhs,
            Primitive::Emit | Primitive::Control => 1,
            Primitive::Call { steps } => steps,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Add { .. } => "add",
            Primitive::Sub { .. } => "sub",
            Primitive::Cmp { .. } => "cmp",
            Primitive::Shift { .. } => "shift",
            Primitive::Mul { .. } => "mul",
            Primitive::Div { .. } => "div",
            Primitive::Read { .. } => "read",
            Primitive::Write { .. } => "write",
            Primitive::Emit => "emit",
            Primitive::Control => "control",
            Primitive::Call { .. } => "call",
        }
    }
}

/// Why a program body stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    /// The step budget ran out.
    Exhausted,
    /// The program hit an error it cannot continue from.
    Fault(String),
}

pub type Step<T = ()> = Result<T, Stop>;

type Body = dyn Fn(&mut Vm) -> Step + Send + Sync;

/// A named host procedure plus the function it is declared to compute.
#[derive(Clone)]
pub struct CostedProgram {
    name: String,
    function: String,
    arity: usize,
    body: Arc<Body>,
}

impl fmt::Debug for CostedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostedProgram")
            .field("name", &self.name)
            .field("function", &self.function)
            .field("arity", &self.arity)
            .finish_non_exhaustive()
    }
}

impl CostedProgram {
    pub fn new(
        name: impl Into<String>,
        function: impl Into<String>,
        arity: usize,
        body: impl Fn(&mut Vm) -> Step + Send + Sync + 'static,
    ) -> Self {
        CostedProgram { name: name.into(), function: function.into(), arity, body: Arc::new(body) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn function(&self) -> &str {
        &self.function
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("step budget must be positive")]
    ZeroBudget,
    #[error("`{program}` takes {expected} argument(s), got {got}")]
    Arity { program: String, expected: usize, got: usize },
    #[error("`{program}` faulted: {message}")]
    Fault { program: String, message: String },
}

/// Whether a sub-program's emissions reach the caller's output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallMode {
    Pass,
    Suppress,
}

/// Execution context handed to a program body.
pub struct Vm {
    args: Vec<BigUint>,
    budget: u64,
    steps: u64,
    events: Vec<Emission>,
    audit: bool,
    charges: Vec<Primitive>,
    execs: Vec<Primitive>,
}

impl Vm {
    fn new(args: Vec<BigUint>, budget: u64, audit: bool) -> Vm {
        Vm { args, budget, steps: 0, events: Vec::new(), audit, charges: Vec::new(), execs: Vec::new() }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.steps
    }

    pub fn arg_count(&self) -> usize {
        self.args.len()
    }

    /// The raw argument tuple, free of charge. Combinators use it to forward
    /// their input to sub-programs, which charge their own reads.
    pub fn args(&self) -> &[BigUint] {
        &self.args
    }

    /// Charges `p`. On overflow the meter is set to the budget.
    pub fn charge(&mut self, p: Primitive) -> Step {
        let cost = p.cost();
        if cost > self.remaining() {
            self.steps = self.budget;
            return Err(Stop::Exhausted);
        }
        self.steps += cost;
        if self.audit {
            self.charges.push(p);
        }
        Ok(())
    }

    fn exec(&mut self, p: Primitive) {
        if self.audit {
            self.execs.push(p);
        }
    }

    /// Charges `p`, then runs `f`. Used for operations the helpers below do
    /// not cover.
    pub fn op<T>(&mut self, p: Primitive, f: impl FnOnce() -> T) -> Step<T> {
        self.charge(p)?;
        self.exec(p);
        Ok(f())
    }

    /// Reads argument `i`, charged by its length.
    pub fn arg(&mut self, i: usize) -> Step<BigUint> {
        let Some(v) = self.args.get(i).cloned() else {
            return Err(Stop::Fault(format!("argument {i} missing")));
        };
        self.op(Primitive::Read { bits: bit_len(&v) }, || v)
    }

    pub fn tick(&mut self) -> Step {
        self.op(Primitive::Control, || ())
    }

    pub fn read_mem(&mut self, bits: u64) -> Step {
        self.op(Primitive::Read { bits: bits.max(1) }, || ())
    }

    pub fn write_mem(&mut self, bits: u64) -> Step {
        self.op(Primitive::Write { bits: bits.max(1) }, || ())
    }

    pub fn add(&mut self, a: &BigUint, b: &BigUint) -> Step<BigUint> {
        self.op(Primitive::Add { bits: bit_len(a) + bit_len(b) }, || a + b)
    }

    /// Truncated subtraction: `a - b`, or a fault if `b > a`.
    pub fn sub(&mut self, a: &BigUint, b: &BigUint) -> Step<BigUint> {
        self.charge(Primitive::Sub { bits: bit_len(a) + bit_len(b) })?;
        self.exec(Primitive::Sub { bits: bit_len(a) + bit_len(b) });
        if b > a {
            return Err(Stop::Fault("subtraction underflow".into()));
        }
        Ok(a - b)
    }

    pub fn cmp(&mut self, a: &BigUint, b: &BigUint) -> Step<Ordering> {
        self.op(Primitive::Cmp { bits: bit_len(a) + bit_len(b) }, || a.cmp(b))
    }

    pub fn shl(&mut self, a: &BigUint, k: u64) -> Step<BigUint> {
        self.op(Primitive::Shift { bits: bit_len(a) + bit_len(&BigUint::from(k)) }, || a << k)
    }

    pub fn shr(&mut self, a: &BigUint, k: u64) -> Step<BigUint> {
        self.op(Primitive::Shift { bits: bit_len(a) + bit_len(&BigUint::from(k)) }, || a >> k)
    }

    /// Bit `k` of `a` (0 = least significant), priced as a shift.
    pub fn bit(&mut self, a: &BigUint, k: u64) -> Step<bool> {
        self.op(Primitive::Shift { bits: bit_len(a) + bit_len(&BigUint::from(k)) }, || a.bit(k))
    }

    pub fn mul(&mut self, a: &BigUint, b: &BigUint) -> Step<BigUint> {
        self.op(Primitive::Mul { lhs: bit_len(a), rhs: bit_len(b) }, || a * b)
    }

    /// Quotient and remainder.
    pub fn divrem(&mut self, a: &BigUint, b: &BigUint) -> Step<(BigUint, BigUint)> {
        let p = Primitive::Div { lhs: bit_len(a), rhs: bit_len(b) };
        self.charge(p)?;
        self.exec(p);
        if b.is_zero() {
            return Err(Stop::Fault("division by zero".into()));
        }
        Ok((a / b, a % b))
    }

    pub fn emit(&mut self, symbol: Symbol) -> Step {
        if !symbol.is_emittable() {
            return Err(Stop::Fault("blank cannot be emitted".into()));
        }
        self.charge(Primitive::Emit)?;
        self.exec(Primitive::Emit);
        self.events.push(Emission { step: self.steps, symbol });
        Ok(())
    }

    /// Emits `#` followed by the binary encoding of `value`.
    pub fn emit_record(&mut self, value: &BigUint) -> Step {
        self.emit(Symbol::Hash)?;
        for s in encode_symbols(value) {
            self.emit(s)?;
        }
        Ok(())
    }

    /// Runs another program, charged by its step count. The callee gets the
    /// remaining budget; its trace is returned for the caller to inspect.
    pub fn call(&mut self, program: &ProgramHandle, args: &[BigUint], mode: CallMode) -> Step<ExecutionTrace> {
        let trace = self.run_sub(program, args)?;
        let mut replay = Replay::new(&trace);
        replay.advance_to(self, trace.total_steps, mode)?;
        if !trace.halted {
            self.steps = self.budget;
            return Err(Stop::Exhausted);
        }
        Ok(trace)
    }

    /// Runs a sub-program without charging anything yet. Pair with
    /// [`Replay`] to charge and splice its steps piecewise.
    pub fn run_sub(&mut self, program: &ProgramHandle, args: &[BigUint]) -> Step<ExecutionTrace> {
        if self.remaining() == 0 {
            return Err(Stop::Exhausted);
        }
        program.run(args, self.remaining()).map_err(|e| Stop::Fault(e.to_string()))
    }

    /// Operations that skip the meter. Only for seeding faults in audit tests.
    #[doc(hidden)]
    pub fn unmetered(&mut self) -> Unmetered<'_> {
        Unmetered(self)
    }
}

/// See [`Vm::unmetered`].
#[doc(hidden)]
pub struct Unmetered<'a>(&'a mut Vm);

impl Unmetered<'_> {
    pub fn mul(&mut self, a: &BigUint, b: &BigUint) -> BigUint {
        self.0.exec(Primitive::Mul { lhs: bit_len(a), rhs: bit_len(b) });
        a * b
    }
}

/// Cursor over a finished sub-run that charges its steps to a parent [`Vm`]
/// in pieces, so the parent can act in the middle of the sub-run's timeline.
#[derive(Debug)]
pub struct Replay<'t> {
    trace: &'t ExecutionTrace,
    cursor: u64,
    next_event: usize,
}

impl<'t> Replay<'t> {
    pub fn new(trace: &'t ExecutionTrace) -> Self {
        Replay { trace, cursor: 0, next_event: 0 }
    }

    pub fn position(&self) -> u64 {
        self.cursor
    }

    /// Charges sub-run steps `cursor+1 ..= step` to `vm`. With
    /// [`CallMode::Pass`] the sub-run's emissions in that window are copied to
    /// `vm`'s output at the corresponding parent steps.
    pub fn advance_to(&mut self, vm: &mut Vm, step: u64, mode: CallMode) -> Step {
        let step = step.min(self.trace.total_steps);
        if step <= self.cursor {
            return Ok(());
        }
        let delta = step - self.cursor;
        let allowed = delta.min(vm.remaining());
        let base = vm.steps;
        let limit = self.cursor + allowed;
        while let Some(e) = self.trace.events.get(self.next_event) {
            if e.step > limit {
                break;
            }
            if mode == CallMode::Pass {
                vm.events.push(Emission { step: base + (e.step - self.cursor), symbol: e.symbol });
            }
            self.next_event += 1;
        }
        if allowed > 0 {
            let p = Primitive::Call { steps: allowed };
            vm.steps += allowed;
            if vm.audit {
                vm.charges.push(p);
                vm.execs.push(p);
            }
        }
        self.cursor = limit;
        if allowed < delta {
            return Err(Stop::Exhausted);
        }
        Ok(())
    }

    /// Charges everything left.
    pub fn finish(&mut self, vm: &mut Vm, mode: CallMode) -> Step {
        self.advance_to(vm, self.trace.total_steps, mode)?;
        if !self.trace.halted {
            vm.steps = vm.budget;
            return Err(Stop::Exhausted);
        }
        Ok(())
    }
}

struct RunOutcome {
    trace: ExecutionTrace,
    charges: Vec<Primitive>,
    execs: Vec<Primitive>,
}

fn execute(program: &CostedProgram, args: &[BigUint], budget: u64, audit: bool) -> Result<RunOutcome, CostError> {
    if budget == 0 {
        return Err(CostError::ZeroBudget);
    }
    if args.len() != program.arity {
        return Err(CostError::Arity { program: program.name.clone(), expected: program.arity, got: args.len() });
    }
    let mut vm = Vm::new(args.to_vec(), budget, audit);
    let halted = match (program.body)(&mut vm) {
        Ok(()) => true,
        Err(Stop::Exhausted) => false,
        Err(Stop::Fault(message)) => return Err(CostError::Fault { program: program.name.clone(), message }),
    };
    let trace = ExecutionTrace {
        args: args.to_vec(),
        events: vm.events,
        total_steps: if halted { vm.steps } else { budget },
        halted,
        halt_state: None,
    };
    Ok(RunOutcome { trace, charges: vm.charges, execs: vm.execs })
}

/// Runs a costed program on an argument tuple.
pub fn run_costed(program: &CostedProgram, args: &[BigUint], budget: u64) -> Result<ExecutionTrace, CostError> {
    execute(program, args, budget, false).map(|o| o.trace)
}

/// A primitive that ran without being charged, or a charge that does not
/// match the primitive performed at that position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisciplineViolation {
    pub position: usize,
    pub primitive: &'static str,
    pub charged: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRun {
    pub args: Vec<BigUint>,
    pub charged_steps: u64,
    /// Sum of the costs of the logged primitive stream.
    pub recomputed_steps: u64,
    pub primitives: usize,
    pub violations: Vec<DisciplineViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub program: String,
    pub runs: Vec<AuditRun>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.violations.is_empty() && r.charged_steps == r.recomputed_steps)
    }

    pub fn violation_names(&self) -> Vec<&'static str> {
        self.runs.iter().flat_map(|r| r.violations.iter().map(|v| v.primitive)).collect()
    }
}

/// Replays each input with logging on and checks that the performed
/// primitives and the charges line up one to one, and that the charged total
/// equals the cost of the performed stream.
pub fn charge_audit(
    program: &CostedProgram,
    inputs: &[Vec<BigUint>],
    budget: u64,
) -> Result<AuditReport, CostError> {
    let mut runs = Vec::with_capacity(inputs.len());
    for args in inputs {
        let out = execute(program, args, budget, true)?;
        let mut violations = Vec::new();
        let mut charges = out.charges.iter().peekable();
        for (position, exec) in out.execs.iter().enumerate() {
            match charges.peek() {
                Some(&&c) if c == *exec => {
                    charges.next();
                }
                other => violations.push(DisciplineViolation {
                    position,
                    primitive: exec.name(),
                    charged: other.map(|c| c.name()),
                }),
            }
        }
        let recomputed: u64 = out.execs.iter().map(Primitive::cost).sum();
        runs.push(AuditRun {
            args: args.clone(),
            charged_steps: out.trace.total_steps,
            recomputed_steps: recomputed,
            primitives: out.execs.len(),
            violations,
        });
    }
    Ok(AuditReport { program: program.name.clone(), runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn emit_one() -> CostedProgram {
        CostedProgram::new("one", "const1", 1, |vm| vm.emit_record(&n(1)))
    }

    #[test]
    fn constant_program() {
        let t = run_costed(&emit_one(), &[n(42)], 100).unwrap();
        assert_eq!(t.output_string(), "#1");
        assert_eq!(t.total_steps, 2);
        assert!(t.halted);
    }

    #[test]
    fn multiplication_cost_is_product_of_lengths() {
        let x = n((1 << 10) - 1);
        let p = CostedProgram::new("sq", "square", 0, move |vm| {
            let before = vm.steps();
            vm.mul(&x, &x)?;
            assert_eq!(vm.steps() - before, 100);
            Ok(())
        });
        assert_eq!(run_costed(&p, &[], 1000).unwrap().total_steps, 100);
    }

    #[test]
    fn budget_exhaustion_pins_total_to_budget() {
        let p = CostedProgram::new("spin", "none", 0, |vm| loop {
            vm.tick()?;
        });
        let t = run_costed(&p, &[], 77).unwrap();
        assert!(!t.halted);
        assert_eq!(t.total_steps, 77);
        assert_eq!(run_costed(&p, &[], 0).unwrap_err(), CostError::ZeroBudget);
    }

    #[test]
    fn audit_catches_unmetered_multiply() {
        let bad = CostedProgram::new("bad", "square", 1, |vm| {
            let x = vm.arg(0)?;
            let y = vm.unmetered().mul(&x, &x);
            vm.emit_record(&y)
        });
        let report = charge_audit(&bad, &[vec![n(12)]], 1000).unwrap();
        assert!(!report.passed());
        assert_eq!(report.violation_names(), vec!["mul"]);

        let good = charge_audit(&emit_one(), &[vec![n(1)], vec![n(9)]], 1000).unwrap();
        assert!(good.passed());
    }

    #[test]
    fn emission_steps_follow_the_meter() {
        let p = CostedProgram::new("p", "f", 1, |vm| {
            let x = vm.arg(0)?;
            let y = vm.add(&x, &x)?;
            vm.emit_record(&y)
        });
        let t = run_costed(&p, &[n(3)], 1000).unwrap();
        // read 2, add 4, then one step per symbol of "#110"
        assert_eq!(t.events.iter().map(|e| e.step).collect::<Vec<_>>(), vec![7, 8, 9, 10]);
    }
}
