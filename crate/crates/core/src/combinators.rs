//! Program handles and the machine constructions built from them.
//!
//! A [`ProgramHandle`] wraps either a Turing machine or a costed program. The
//! constructions return new handles and never touch their inputs.
//!
//! The restart enumerator of a Turing machine is glued at machine level
//! ([`crate::tm::glue`]). All other constructions, and the restart of costed
//! programs, are hosted on the cost-model VM: the host loop calls its
//! components as sub-runs charged by their exact step counts, and each loop
//! iteration is charged one control step.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::approx::ApproximationWitness;
use crate::costvm::{run_costed, CallMode, CostError, CostedProgram, Replay, Stop};
use crate::tm::glue::{self, GlueError};
use crate::tm::{records, run_args, run_word, scan_records, ExecutionTrace, MachineSpec, RunError, Symbol};

#[derive(Clone)]
pub enum Backend {
    Tm(Arc<MachineSpec>),
    CostVm(Arc<CostedProgram>),
}

/// An immutable, cheaply clonable reference to a runnable program.
#[derive(Clone)]
pub struct ProgramHandle {
    name: String,
    function: String,
    backend: Backend,
}

impl fmt::Debug for ProgramHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProgramHandle({} [{}] computing {})", self.name, self.backend_tag(), self.function)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("`{program}` did not halt within {budget} steps")]
    NoHalt { program: String, budget: u64 },
    #[error("`{program}` halted without a well-formed final record")]
    NoValue { program: String },
    #[error("`{program}` runs on naturals only, not raw tape words")]
    WordInput { program: String },
}

impl ProgramHandle {
    pub fn tm(name: impl Into<String>, function: impl Into<String>, spec: MachineSpec) -> Self {
        ProgramHandle { name: name.into(), function: function.into(), backend: Backend::Tm(Arc::new(spec)) }
    }

    pub fn costvm(program: CostedProgram) -> Self {
        ProgramHandle {
            name: program.name().to_string(),
            function: program.function().to_string(),
            backend: Backend::CostVm(Arc::new(program)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Name of the function this program is declared to compute.
    pub fn function(&self) -> &str {
        &self.function
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn backend_tag(&self) -> &'static str {
        match self.backend {
            Backend::Tm(_) => "tm",
            Backend::CostVm(_) => "costvm",
        }
    }

    pub fn spec(&self) -> Option<&MachineSpec> {
        match &self.backend {
            Backend::Tm(spec) => Some(spec),
            Backend::CostVm(_) => None,
        }
    }

    /// Same program under another registry name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        ProgramHandle { name: name.into(), ..self.clone() }
    }

    pub fn run(&self, args: &[BigUint], budget: u64) -> Result<ExecutionTrace, ProgramError> {
        match &self.backend {
            Backend::Tm(spec) => Ok(run_args(spec, args, budget)?),
            Backend::CostVm(p) => Ok(run_costed(p, args, budget)?),
        }
    }

    /// Runs a Turing machine on raw tape-0 content.
    pub fn run_word(&self, input: &[Symbol], budget: u64) -> Result<ExecutionTrace, ProgramError> {
        match &self.backend {
            Backend::Tm(spec) => Ok(run_word(spec, input, budget)?),
            Backend::CostVm(_) => Err(ProgramError::WordInput { program: self.name.clone() }),
        }
    }

    /// Runs to completion and decodes the final record.
    pub fn evaluate(&self, args: &[BigUint], budget: u64) -> Result<(BigUint, u64), ProgramError> {
        let trace = self.run(args, budget)?;
        if !trace.halted {
            return Err(ProgramError::NoHalt { program: self.name.clone(), budget });
        }
        let value = trace.final_value().ok_or_else(|| ProgramError::NoValue { program: self.name.clone() })?;
        Ok((value, trace.total_steps))
    }
}

#[derive(Debug, Error)]
pub enum CombinatorError {
    #[error("`{0}` is not restartable: {1}")]
    NotRestartable(String, GlueError),
}

fn arg_u64(vm_args: &[BigUint], i: usize) -> Result<u64, Stop> {
    vm_args
        .get(i)
        .and_then(|v| v.to_u64())
        .ok_or_else(|| Stop::Fault(format!("argument {i} missing or too large")))
}

fn value_of(trace: &ExecutionTrace, who: &str) -> Result<BigUint, Stop> {
    trace.final_value().ok_or_else(|| Stop::Fault(format!("`{who}` left no final record")))
}

/// Inputs on which a Turing machine is checked against the restartable
/// contract before it is glued.
const RESTART_PROBE: std::ops::RangeInclusive<u64> = 1..=8;
const RESTART_PROBE_BUDGET: u64 = 10_000_000;

/// Runs `M` on `1, 2, ..., n` from scratch, passing every emission through.
///
/// For a Turing machine the result is a glued Turing machine (and `M` must be
/// restartable). For a costed program the host loop charges one control step
/// per call and one at the end.
pub fn restart_enumerator(m: &ProgramHandle) -> Result<ProgramHandle, CombinatorError> {
    let name = format!("restart({})", m.name());
    match m.backend() {
        Backend::Tm(spec) => {
            let wrap = |e| CombinatorError::NotRestartable(m.name().to_string(), e);
            glue::check_restartable(spec, RESTART_PROBE.map(BigUint::from), RESTART_PROBE_BUDGET).map_err(wrap)?;
            let glued = glue::restart(spec).map_err(wrap)?;
            Ok(ProgramHandle::tm(name, m.function(), glued))
        }
        Backend::CostVm(_) => {
            let m = m.clone();
            let program = CostedProgram::new(name, m.function().to_string(), 1, move |vm| {
                let n = arg_u64(vm.args(), 0)?;
                for i in 1..=n {
                    vm.tick()?;
                    vm.call(&m, &[BigUint::from(i)], CallMode::Pass)?;
                }
                vm.tick()
            });
            Ok(ProgramHandle::costvm(program))
        }
    }
}

/// Emits `#base`, then for `i = 2..=n` calls `step(i, f(i-1))`, which must
/// emit `#f(i)` as its final record.
pub fn incremental_enumerator(function: &str, base: BigUint, step: &ProgramHandle) -> ProgramHandle {
    let step = step.clone();
    let name = format!("incremental({})", step.name());
    let program = CostedProgram::new(name, function.to_string(), 1, move |vm| {
        let n = arg_u64(vm.args(), 0)?;
        if n == 0 {
            return vm.tick();
        }
        vm.emit_record(&base)?;
        let mut prev = base.clone();
        for i in 2..=n {
            vm.tick()?;
            let trace = vm.call(&step, &[BigUint::from(i), prev], CallMode::Pass)?;
            prev = value_of(&trace, step.name())?;
        }
        vm.tick()
    });
    ProgramHandle::costvm(program)
}

/// `P ∘ M`: runs `M` with its output suppressed, then `P` on `M`'s final
/// value with its output passed through. One control step separates them.
pub fn compose_serial(p: &ProgramHandle, m: &ProgramHandle) -> ProgramHandle {
    let (p, m) = (p.clone(), m.clone());
    let name = format!("{}∘{}", p.name(), m.name());
    let function = format!("{}∘{}", p.function(), m.function());
    let program = CostedProgram::new(name, function, 1, move |vm| {
        let args = vm.args().to_vec();
        let trace = vm.call(&m, &args, CallMode::Suppress)?;
        let value = value_of(&trace, m.name())?;
        vm.tick()?;
        vm.call(&p, &[value], CallMode::Pass)?;
        Ok(())
    });
    ProgramHandle::costvm(program)
}

/// Steps the ⊗ construction adds on top of `T(M(n)) + Σ steps_P(n, i)`.
pub const OTIMES_GLUE: u64 = 1;

/// The daughter `P ⊗ M` of an approximation witness.
///
/// Runs `M(n)` with its output suppressed. When the record `ρ(n, i)` of `M`
/// reaches its final content, the daughter pauses `M`, calls
/// `P(n, i, r_{n,ρ(n,i)})` with its output passed through (so `#f(i)` appears),
/// and resumes `M`. Total charge is exactly
/// `T(M(n)) + Σ_i steps_P(n, i) + OTIMES_GLUE`.
pub fn otimes(w: &ApproximationWitness) -> ProgramHandle {
    let w = w.clone();
    let name = format!("{}⊗{}", w.p.name(), w.m.name());
    let program = CostedProgram::new(name, w.function.clone(), 1, move |vm| {
        let n = arg_u64(vm.args(), 0)?;
        vm.tick()?;
        let m_trace = vm.run_sub(&w.m, &[BigUint::from(n)])?;
        let recs = scan_records(&m_trace);
        let mut replay = Replay::new(&m_trace);
        for i in 1..=n {
            let idx = w
                .rho
                .designate(n, i, recs.len())
                .map_err(|e| Stop::Fault(e.to_string()))?;
            let rec = recs
                .get(idx - 1)
                .ok_or_else(|| Stop::Fault(format!("record {idx} of `{}` missing", w.m.name())))?;
            replay.advance_to(vm, rec.complete_step(), CallMode::Suppress)?;
            let args = [BigUint::from(n), BigUint::from(i), rec.value()];
            vm.call(&w.p, &args, CallMode::Pass)?;
        }
        replay.finish(vm, CallMode::Suppress)
    });
    ProgramHandle::costvm(program)
}

/// The interleave `g(2i-1) = f(i)`, `g(2i) = 1` of an E-machine for `f`.
#[derive(Debug, Clone)]
pub struct Interleave {
    /// E-machine for `g`.
    pub enumerator: ProgramHandle,
    /// Computes `g(m)` directly; cheap on even `m`.
    pub shortcut: ProgramHandle,
}

/// Builds both programs for the interleave of `f`. `e_f` must emit exactly one
/// record per index, `#f(1)#f(2)...`, as the constructions in this module do.
pub fn interleave_trivial(e_f: &ProgramHandle) -> Interleave {
    let function = format!("interleave({})", e_f.function());

    let ef = e_f.clone();
    let enumerator = CostedProgram::new(format!("interleave({})", ef.name()), function.clone(), 1, move |vm| {
        let m = vm.arg(0)?;
        let one = BigUint::one();
        let half = vm.add(&m, &one)?;
        let k = vm.shr(&half, 1)?;
        let odd = vm.bit(&m, 0)?;
        let trace = vm.run_sub(&ef, std::slice::from_ref(&k))?;
        let recs = records(&trace).map_err(|e| Stop::Fault(e.to_string()))?;
        let k = k.to_usize().ok_or_else(|| Stop::Fault("index too large".into()))?;
        if recs.len() != k {
            return Err(Stop::Fault(format!("`{}` emitted {} records for input {k}", ef.name(), recs.len())));
        }
        let mut replay = Replay::new(&trace);
        for (j, rec) in recs.iter().enumerate() {
            replay.advance_to(vm, rec.complete_step(), CallMode::Pass)?;
            if j + 1 < k || !odd {
                vm.emit(Symbol::Hash)?;
                vm.emit(Symbol::One)?;
            }
        }
        replay.finish(vm, CallMode::Pass)
    });

    let ef = e_f.clone();
    let shortcut = CostedProgram::new(format!("interleave-shortcut({})", ef.name()), function, 1, move |vm| {
        let m = vm.arg(0)?;
        if !vm.bit(&m, 0)? {
            return vm.emit_record(&BigUint::one());
        }
        let half = vm.add(&m, &BigUint::one())?;
        let k = vm.shr(&half, 1)?;
        let trace = vm.call(&ef, &[k], CallMode::Suppress)?;
        let value = value_of(&trace, ef.name())?;
        vm.emit_record(&value)
    });

    Interleave { enumerator: ProgramHandle::costvm(enumerator), shortcut: ProgramHandle::costvm(shortcut) }
}
