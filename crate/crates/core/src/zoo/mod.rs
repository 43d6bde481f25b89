//! Concrete functions: independent oracles plus instrumented programs.
//!
//! Registry names follow one scheme:
//!
//! - `zoo/<function>.<variant>` for programs computing a zoo function
//!   (`direct`, `step`, `incremental`, `restart`, `shortcut`, ...),
//! - `tm/<machine>` for the hand-built Turing machines,
//! - `helper/<name>` for witness helpers,
//! - `approx/<witness>` for approximation witnesses, with `.daughter` and
//!   `.based` suffixes naming the machines built from them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::analysis::InputFamily;
use crate::approx::{based_machine, ApproximationWitness, ManifestError, WitnessManifest};
use crate::bound::Bound;
use crate::combinators::{otimes, ProgramHandle};
use crate::costvm::{CostedProgram, Step, Stop, Vm};
use crate::etm::Oracle;
use crate::tm::{machines, MachineSpec};

pub mod arith;
pub mod bitsum;
pub mod eca;
pub mod lang;
pub mod life;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Role {
    /// Computes `f(n)` as a single record.
    Direct,
    /// Computes `f(i)` from `(i, f(i-1))`.
    Step,
    /// E-machine for `f`.
    Enumerator,
    /// Computes `f(n)` directly by a faster route than the enumerators.
    Shortcut,
}

impl Role {
    /// Programs whose final record is `f(n)` on input `n`.
    pub fn computes_value(self) -> bool {
        !matches!(self, Role::Step)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Direct => "direct",
            Role::Step => "step",
            Role::Enumerator => "enumerator",
            Role::Shortcut => "shortcut",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct ZooProgram {
    pub role: Role,
    pub handle: ProgramHandle,
}

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub function: String,
    pub oracle: Oracle,
    pub programs: Vec<ZooProgram>,
    /// Upper bound on the bit length of `f(n)`, with `log n` read as the bit
    /// length of `n`.
    pub value_bits: Bound,
    /// Range on which every program is checked against the oracle.
    pub n_max: u64,
    pub notes: &'static str,
}

impl ZooEntry {
    pub fn new(function: &str, oracle: Oracle, value_bits: &str, n_max: u64, notes: &'static str) -> ZooEntry {
        ZooEntry {
            function: function.to_string(),
            oracle,
            programs: Vec::new(),
            value_bits: value_bits.parse().expect("registry bounds are well-formed"),
            n_max,
            notes,
        }
    }

    /// Adds a program under the registry name `zoo/<function>.<variant>`.
    pub fn with(mut self, role: Role, variant: &str, handle: ProgramHandle) -> ZooEntry {
        let name = format!("zoo/{}.{variant}", self.function);
        self.programs.push(ZooProgram { role, handle: handle.renamed(name) });
        self
    }

    pub fn program(&self, variant: &str) -> Option<&ProgramHandle> {
        let name = format!("zoo/{}.{variant}", self.function);
        self.programs.iter().find(|p| p.handle.name() == name).map(|p| &p.handle)
    }

    pub fn by_role(&self, role: Role) -> Vec<ProgramHandle> {
        self.programs.iter().filter(|p| p.role == role).map(|p| p.handle.clone()).collect()
    }

    /// Every program whose final record is `f(n)`: candidates for the
    /// best-known stand-in of an optimal machine.
    pub fn any_programs(&self) -> Vec<ProgramHandle> {
        self.programs.iter().filter(|p| p.role.computes_value()).map(|p| p.handle.clone()).collect()
    }

    pub fn enumerators(&self) -> Vec<ProgramHandle> {
        self.by_role(Role::Enumerator)
    }
}

/// All zoo entries, machines, helpers and witnesses, by name.
#[derive(Debug, Clone)]
pub struct Registry {
    entries: BTreeMap<String, ZooEntry>,
    machines: BTreeMap<String, ProgramHandle>,
    helpers: BTreeMap<String, ProgramHandle>,
    witnesses: BTreeMap<String, ApproximationWitness>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::standard()
    }
}

impl Registry {
    pub fn empty() -> Registry {
        Registry {
            entries: BTreeMap::new(),
            machines: BTreeMap::new(),
            helpers: BTreeMap::new(),
            witnesses: BTreeMap::new(),
        }
    }

    /// The shipped registry.
    pub fn standard() -> Registry {
        let mut r = Registry::empty();
        for spec in machines::all() {
            r.add_machine(spec);
        }
        for e in arith::entries() {
            r.add_entry(e);
        }
        r.add_entry(bitsum::bitsum3());
        r.add_entry(bitsum::bitsum3_msb());
        for e in lang::entries() {
            r.add_entry(e);
        }
        r.add_entry(eca::entry(30));
        r.add_entry(eca::entry(110));
        r.add_entry(life::entry());
        r.add_entry(arith::interleave_factorial());
        for h in arith::helpers() {
            r.add_helper(h);
        }
        for w in arith::witnesses(&r) {
            r.add_witness(w);
        }
        r
    }

    pub fn add_entry(&mut self, e: ZooEntry) {
        self.entries.insert(e.function.clone(), e);
    }

    pub fn add_machine(&mut self, spec: MachineSpec) {
        let name = format!("tm/{}", spec.name());
        let function = spec.name().to_string();
        self.machines.insert(name.clone(), ProgramHandle::tm(name, function, spec));
    }

    pub fn add_helper(&mut self, h: ProgramHandle) {
        self.helpers.insert(h.name().to_string(), h);
    }

    pub fn add_witness(&mut self, w: ApproximationWitness) {
        self.witnesses.insert(w.name.clone(), w);
    }

    pub fn entry(&self, function: &str) -> Option<&ZooEntry> {
        self.entries.get(function)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ZooEntry> {
        self.entries.values()
    }

    pub fn oracle(&self, function: &str) -> Option<&Oracle> {
        self.entry(function).map(|e| &e.oracle)
    }

    pub fn witness(&self, name: &str) -> Option<&ApproximationWitness> {
        self.witnesses.get(name)
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &ApproximationWitness> {
        self.witnesses.values()
    }

    pub fn helper(&self, name: &str) -> Option<&ProgramHandle> {
        self.helpers.get(name)
    }

    /// Looks up any runnable program by registry name, building daughters
    /// and based machines of witnesses on demand.
    pub fn program(&self, name: &str) -> Option<ProgramHandle> {
        if let Some(p) = self.machines.get(name).or_else(|| self.helpers.get(name)) {
            return Some(p.clone());
        }
        if let Some(p) = self.entries.values().flat_map(|e| &e.programs).find(|p| p.handle.name() == name) {
            return Some(p.handle.clone());
        }
        if let Some(w) = name.strip_suffix(".daughter").and_then(|w| self.witnesses.get(w)) {
            return Some(otimes(w).renamed(name));
        }
        if let Some(w) = name.strip_suffix(".based").and_then(|w| self.witnesses.get(w)) {
            return Some(based_machine(w).renamed(name));
        }
        None
    }

    /// Function name a program is registered under, if it belongs to an entry
    /// or is built from a witness.
    pub fn function_of(&self, name: &str) -> Option<String> {
        if let Some(e) = self.entries.values().find(|e| e.programs.iter().any(|p| p.handle.name() == name)) {
            return Some(e.function.clone());
        }
        let base = name.strip_suffix(".daughter").or_else(|| name.strip_suffix(".based"))?;
        self.witnesses.get(base).map(|w| w.function.clone())
    }

    pub fn program_names(&self) -> Vec<String> {
        let mut out: Vec<String> = self.machines.keys().chain(self.helpers.keys()).cloned().collect();
        out.extend(self.entries.values().flat_map(|e| e.programs.iter().map(|p| p.handle.name().to_string())));
        for w in self.witnesses.keys() {
            out.push(format!("{w}.daughter"));
            out.push(format!("{w}.based"));
        }
        out.sort();
        out
    }

    /// Input family for measuring a program: words for the palindrome
    /// deciders, naturals for everything else.
    pub fn input_family(&self, name: &str) -> InputFamily {
        match name {
            "tm/palindrome1" | "tm/palindrome2" => InputFamily::PalindromeWord,
            _ => InputFamily::Natural,
        }
    }

    /// Resolves a manifest's registry names into a witness.
    pub fn resolve_manifest(&self, m: &WitnessManifest) -> Result<ApproximationWitness, ManifestError> {
        let find = |name: &str| {
            self.program(name).ok_or_else(|| ManifestError::UnknownProgram(name.to_string()))
        };
        Ok(ApproximationWitness {
            name: m.name.clone(),
            function: m.function.clone(),
            m: find(&m.m)?,
            p: find(&m.p)?,
            bound: m.bound.clone(),
            rho: m.rho.clone(),
        })
    }
}

// Shared building blocks for the zoo programs.

pub(crate) fn n(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Reads argument `idx` (charged) and converts it for host-side loop bounds.
pub(crate) fn arg_u64(vm: &mut Vm, idx: usize) -> Step<u64> {
    let v = vm.arg(idx)?;
    v.to_u64().ok_or_else(|| Stop::Fault(format!("argument {idx} too large")))
}

/// `i + 1`, charged as an addition.
pub(crate) fn succ(vm: &mut Vm, i: &BigUint) -> Step<BigUint> {
    vm.add(i, &BigUint::one())
}

/// A one-argument program computing `value(vm, n)` and emitting it as its
/// only record.
pub(crate) fn direct(
    function: &str,
    value: impl Fn(&mut Vm, u64) -> Step<BigUint> + Send + Sync + 'static,
) -> ProgramHandle {
    ProgramHandle::costvm(CostedProgram::new(format!("{function}.direct"), function, 1, move |vm| {
        let n = arg_u64(vm, 0)?;
        let v = value(vm, n)?;
        vm.emit_record(&v)
    }))
}

/// A step program: `(i, f(i-1)) ↦ f(i)`.
pub(crate) fn step(
    function: &str,
    next: impl Fn(&mut Vm, &BigUint, &BigUint) -> Step<BigUint> + Send + Sync + 'static,
) -> ProgramHandle {
    ProgramHandle::costvm(CostedProgram::new(format!("{function}.step"), function, 2, move |vm| {
        let i = vm.arg(0)?;
        let prev = vm.arg(1)?;
        let v = next(vm, &i, &prev)?;
        vm.emit_record(&v)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        let r = Registry::standard();
        for name in r.program_names() {
            assert!(r.program(&name).is_some(), "{name}");
        }
        assert!(r.program("zoo/factorial.incremental").is_some());
        assert!(r.program("approx/factorial.doubled.daughter").is_some());
        assert_eq!(r.function_of("approx/factorial.doubled.based").as_deref(), Some("factorial"));
        assert!(r.program("zoo/nope.direct").is_none());
    }

    #[test]
    fn every_entry_has_an_enumerator() {
        let r = Registry::standard();
        for e in r.entries() {
            assert!(!e.enumerators().is_empty(), "{}", e.function);
            assert!(!e.any_programs().is_empty(), "{}", e.function);
        }
    }
}
