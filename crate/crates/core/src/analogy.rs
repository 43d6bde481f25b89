//! Computational analogy witnesses: verification on a range, composition,
//! lifting approximations across a witness, timing audits, and the class
//! ledger.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{registry_best, theta_compare, AnalysisError, BestReport, InputFamily, TimingSeries};
use crate::approx::{cir_falsifier, ApproximationWitness, FalsifierError, FalsifierReport};
use crate::bound::Bound;
use crate::combinators::{ProgramError, ProgramHandle};
use crate::costvm::{CallMode, CostedProgram, Stop};
use crate::etm::Oracle;
use crate::zoo::{Registry, ZooEntry};
use crate::ThetaComparison;

/// `f CA g` packaged as two translators with their step bounds.
#[derive(Debug, Clone)]
pub struct CAWitness {
    pub name: String,
    pub f: String,
    pub g: String,
    /// `(n, f(n)) ↦ g(n)` within `bound_fg(n)` steps.
    pub p_fg: ProgramHandle,
    /// `(n, g(n)) ↦ f(n)` within `bound_gf(n)` steps.
    pub p_gf: ProgramHandle,
    pub bound_fg: Bound,
    pub bound_gf: Bound,
}

impl CAWitness {
    /// The same witness read from `g` to `f`.
    pub fn swapped(&self) -> CAWitness {
        CAWitness {
            name: format!("{}~swap", self.name),
            f: self.g.clone(),
            g: self.f.clone(),
            p_fg: self.p_gf.clone(),
            p_gf: self.p_fg.clone(),
            bound_fg: self.bound_gf.clone(),
            bound_gf: self.bound_fg.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    FToG,
    GToF,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CAViolation {
    #[error("{direction:?} at n={n}: {error}")]
    Program { direction: Direction, n: u64, error: ProgramError },
    #[error("{direction:?} at n={n}: produced {got:?}, expected {expected}")]
    Value { direction: Direction, n: u64, expected: BigUint, got: Option<BigUint> },
    #[error("{direction:?} at n={n}: {steps} steps over the bound {bound}")]
    Bound { direction: Direction, n: u64, steps: u64, bound: u64 },
}

impl CAViolation {
    pub fn n(&self) -> u64 {
        match self {
            CAViolation::Program { n, .. } | CAViolation::Value { n, .. } | CAViolation::Bound { n, .. } => *n,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CAPoint {
    pub n: u64,
    pub steps_fg: u64,
    pub bound_fg: u64,
    pub steps_gf: u64,
    pub bound_gf: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CAReport {
    pub witness: String,
    pub f: String,
    pub g: String,
    pub points: Vec<CAPoint>,
    /// `(n, F(n)·n / T_best_g(n))`, when a best-known series for `g` was given.
    pub admissibility_fg: Vec<(u64, f64)>,
    /// `(n, G(n)·n / T_best_f(n))`.
    pub admissibility_gf: Vec<(u64, f64)>,
    pub caveat: &'static str,
}

fn translate(
    p: &ProgramHandle,
    direction: Direction,
    n: u64,
    input: BigUint,
    expected: BigUint,
    bound: &Bound,
    budget: u64,
) -> Result<(u64, u64), CAViolation> {
    let trace = p.run(&[BigUint::from(n), input], budget).map_err(|error| CAViolation::Program { direction, n, error })?;
    let got = trace.halted.then(|| trace.final_value()).flatten();
    if got.as_ref() != Some(&expected) {
        return Err(CAViolation::Value { direction, n, expected, got });
    }
    let b = bound.eval(n);
    if trace.total_steps > b {
        return Err(CAViolation::Bound { direction, n, steps: trace.total_steps, bound: b });
    }
    Ok((trace.total_steps, b))
}

fn admissibility(bound: &Bound, best: Option<&TimingSeries>) -> Vec<(u64, f64)> {
    best.map(|s| {
        s.points.iter().filter(|p| p.1 > 0).map(|&(n, t)| (n, bound.eval(n) as f64 * n as f64 / t as f64)).collect()
    })
    .unwrap_or_default()
}

/// Checks both directions for every `n` in `1..=n_max`; reports the first
/// failing `n`. `best_f`/`best_g` are best-known timing series for the
/// admissibility ratios.
pub fn verify_ca(
    w: &CAWitness,
    oracle_f: &Oracle,
    oracle_g: &Oracle,
    n_max: u64,
    budget: u64,
    best_f: Option<&TimingSeries>,
    best_g: Option<&TimingSeries>,
) -> Result<CAReport, CAViolation> {
    let results: Vec<Result<CAPoint, CAViolation>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (fv, gv) = (oracle_f.eval(n), oracle_g.eval(n));
            let (steps_fg, bound_fg) = translate(&w.p_fg, Direction::FToG, n, fv.clone(), gv.clone(), &w.bound_fg, budget)?;
            let (steps_gf, bound_gf) = translate(&w.p_gf, Direction::GToF, n, gv, fv, &w.bound_gf, budget)?;
            Ok(CAPoint { n, steps_fg, bound_fg, steps_gf, bound_gf })
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(CAReport {
        witness: w.name.clone(),
        f: w.f.clone(),
        g: w.g.clone(),
        points,
        admissibility_fg: admissibility(&w.bound_fg, best_g),
        admissibility_gf: admissibility(&w.bound_gf, best_f),
        caveat: crate::approx::BEST_KNOWN_CAVEAT,
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CAError {
    #[error("cannot compose `{left}` (ending at {left_g}) with `{right}` (starting at {right_f})")]
    MiddleMismatch { left: String, left_g: String, right: String, right_f: String },
    #[error("witness `{witness}` starts at {witness_f}, approximation `{approx}` is for {approx_f}")]
    LiftMismatch { witness: String, witness_f: String, approx: String, approx_f: String },
    #[error("no zoo entry for `{0}`")]
    UnknownFunction(String),
}

/// Steps added between the two translators of a composed witness.
pub const HANDOFF_GLUE: u64 = 1;

/// `(n, v) ↦ second(n, first(n, v))`, the first call's output suppressed.
fn chain(first: &ProgramHandle, second: &ProgramHandle) -> ProgramHandle {
    let (a, b) = (first.clone(), second.clone());
    let name = format!("{}→{}", a.name(), b.name());
    let function = b.function().to_string();
    ProgramHandle::costvm(CostedProgram::new(name, function, 2, move |vm| {
        let args = vm.args().to_vec();
        let mid = vm.call(&a, &args, CallMode::Suppress)?;
        let v = mid.final_value().ok_or_else(|| Stop::Fault(format!("`{}` left no value", a.name())))?;
        vm.tick()?;
        vm.call(&b, &[args[0].clone(), v], CallMode::Pass)?;
        Ok(())
    }))
}

/// Transitivity: from `f CA g` and `g CA h`, a witness for `f CA h` whose
/// bounds are the sums plus [`HANDOFF_GLUE`].
pub fn compose_witness(fg: &CAWitness, gh: &CAWitness) -> Result<CAWitness, CAError> {
    if fg.g != gh.f {
        return Err(CAError::MiddleMismatch {
            left: fg.name.clone(),
            left_g: fg.g.clone(),
            right: gh.name.clone(),
            right_f: gh.f.clone(),
        });
    }
    let glue = Bound::constant(HANDOFF_GLUE);
    Ok(CAWitness {
        name: format!("({})∘({})", fg.name, gh.name),
        f: fg.f.clone(),
        g: gh.g.clone(),
        p_fg: chain(&fg.p_fg, &gh.p_fg),
        p_gf: chain(&gh.p_gf, &fg.p_gf),
        bound_fg: fg.bound_fg.plus(&gh.bound_fg).plus(&glue),
        bound_gf: gh.bound_gf.plus(&fg.bound_gf).plus(&glue),
    })
}

/// Carries an approximation for `f` across `f CA g`: same `M` and `ρ`,
/// helper `(n, i, r) ↦ P_fg(i, P(n, i, r))`, bound `F_a + F_fg + 1`.
pub fn lift_approximation(w: &CAWitness, a: &ApproximationWitness) -> Result<ApproximationWitness, CAError> {
    if a.function != w.f {
        return Err(CAError::LiftMismatch {
            witness: w.name.clone(),
            witness_f: w.f.clone(),
            approx: a.name.clone(),
            approx_f: a.function.clone(),
        });
    }
    let (p, p_fg) = (a.p.clone(), w.p_fg.clone());
    let helper = ProgramHandle::costvm(CostedProgram::new(
        format!("lift({}, {})", p.name(), p_fg.name()),
        w.g.clone(),
        3,
        move |vm| {
            let args = vm.args().to_vec();
            let mid = vm.call(&p, &args, CallMode::Suppress)?;
            let v = mid.final_value().ok_or_else(|| Stop::Fault(format!("`{}` left no value", p.name())))?;
            vm.tick()?;
            vm.call(&p_fg, &[args[1].clone(), v], CallMode::Pass)?;
            Ok(())
        },
    ));
    Ok(ApproximationWitness {
        name: format!("{} lifted along {}", a.name, w.name),
        function: w.g.clone(),
        m: a.m.clone(),
        p: helper,
        bound: a.bound.plus(&w.bound_fg).plus(&Bound::constant(HANDOFF_GLUE)),
        rho: a.rho.clone(),
    })
}

/// `f CA f` through the identity translator. It reads and re-emits a value
/// of `w` bits in `2w + 1` steps, hence the bound `2·value_bits + 1`.
pub fn reflexive(entry: &ZooEntry, identity: &ProgramHandle) -> CAWitness {
    let bound = entry.value_bits.scaled(2).plus(&Bound::constant(1));
    CAWitness {
        name: format!("ca/{}~{}", entry.function, entry.function),
        f: entry.function.clone(),
        g: entry.function.clone(),
        p_fg: identity.clone(),
        p_gf: identity.clone(),
        bound_fg: bound.clone(),
        bound_gf: bound,
    }
}

/// Reflexive witnesses for every zoo function, plus the doubling chain
/// `n! ~ 2·n! ~ 4·n!`.
///
/// Doubling a `w`-bit value costs `3w + 3` and halving one costs `3w + 1`;
/// the bounds follow from `bits(c·n!) ≤ n·log n + log c`.
pub fn standard_witnesses(r: &Registry) -> Vec<CAWitness> {
    let helper = |name: &str| r.helper(name).unwrap_or_else(|| panic!("registry lacks `{name}`")).clone();
    let identity = helper("helper/ca.identity");
    let mut out: Vec<CAWitness> = r.entries().map(|e| reflexive(e, &identity)).collect();
    let pair = |f: &str, g: &str, fg: &str, gf: &str| CAWitness {
        name: format!("ca/{f}~{g}"),
        f: f.into(),
        g: g.into(),
        p_fg: helper("helper/ca.double"),
        p_gf: helper("helper/ca.halve"),
        bound_fg: fg.parse().expect("well-formed bound"),
        bound_gf: gf.parse().expect("well-formed bound"),
    };
    out.push(pair("factorial", "factorial2", "3*nlogn + 3", "3*nlogn + 4"));
    out.push(pair("factorial2", "factorial4", "3*nlogn + 6", "3*nlogn + 7"));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingAudit {
    pub f: String,
    pub g: String,
    /// Best any-program for `f` against the best for `g`.
    pub any_program: ThetaComparison,
    /// Best E-machine for `f` against the best for `g`.
    pub enumerator: ThetaComparison,
    pub contenders: Vec<BestReport>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    CA(#[from] CAError),
}

fn entry<'r>(r: &'r Registry, f: &str) -> Result<&'r ZooEntry, CAError> {
    r.entry(f).ok_or_else(|| CAError::UnknownFunction(f.to_string()))
}

/// Θ comparisons of the best-known programs of two functions, any-program
/// and E-machine kinds, on a common grid.
pub fn timing_audit(
    r: &Registry,
    f: &str,
    g: &str,
    ns: &[u64],
    budget: u64,
    tolerance: f64,
) -> Result<TimingAudit, AuditError> {
    let (ef, eg) = (entry(r, f)?, entry(r, g)?);
    let best = |cands: Vec<ProgramHandle>| registry_best(&cands, ns, budget, InputFamily::Natural);
    let (_, any_f) = best(ef.any_programs())?;
    let (_, any_g) = best(eg.any_programs())?;
    let (_, en_f) = best(ef.enumerators())?;
    let (_, en_g) = best(eg.enumerators())?;
    Ok(TimingAudit {
        f: f.to_string(),
        g: g.to_string(),
        any_program: theta_compare(&any_f.best_series, &any_g.best_series, tolerance)?,
        enumerator: theta_compare(&en_f.best_series, &en_g.best_series, tolerance)?,
        contenders: vec![any_f, any_g, en_f, en_g],
    })
}

pub fn ca_timing_audit(
    w: &CAWitness,
    r: &Registry,
    ns: &[u64],
    budget: u64,
    tolerance: f64,
) -> Result<TimingAudit, AuditError> {
    timing_audit(r, &w.f, &w.g, ns, budget, tolerance)
}

#[derive(Debug, Error)]
pub enum PairError {
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Falsifier(#[from] FalsifierError),
}

/// The falsifier run separately on both sides of a witness, each with its
/// best-known any-program as challenger against its best E-machine.
pub fn falsifier_pair(
    w: &CAWitness,
    r: &Registry,
    ns: &[u64],
    budget: u64,
    tolerance: f64,
) -> Result<(FalsifierReport, FalsifierReport), PairError> {
    let side = |func: &str| -> Result<FalsifierReport, PairError> {
        let e = entry(r, func).map_err(AuditError::from)?;
        let best = |c: Vec<ProgramHandle>| registry_best(&c, ns, budget, InputFamily::Natural).map_err(AuditError::from);
        let (challenger, _) = best(e.any_programs())?;
        let (enumerator, _) = best(e.enumerators())?;
        Ok(cir_falsifier(&e.oracle, &challenger, &enumerator, ns, budget, tolerance)?)
    };
    Ok((side(&w.f)?, side(&w.g)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerWitness {
    pub name: String,
    pub f: String,
    pub g: String,
    pub verified: bool,
    pub n_max: u64,
}

/// Functions and the witnesses recorded between them. Classes are the
/// connected components of verified witnesses, recomputed on demand.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CAClassLedger {
    functions: BTreeSet<String>,
    witnesses: Vec<LedgerWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CAClass {
    pub members: Vec<String>,
    /// Verified witnesses joining members of this class.
    pub witnesses: Vec<String>,
}

impl CAClassLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_function(&mut self, f: &str) {
        self.functions.insert(f.to_string());
    }

    pub fn record(&mut self, w: &CAWitness, verified: bool, n_max: u64) {
        self.add_function(&w.f);
        self.add_function(&w.g);
        self.witnesses.push(LedgerWitness { name: w.name.clone(), f: w.f.clone(), g: w.g.clone(), verified, n_max });
    }

    pub fn classes(&self) -> Vec<CAClass> {
        let names: Vec<&String> = self.functions.iter().collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut parent: Vec<usize> = (0..names.len()).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for w in self.witnesses.iter().filter(|w| w.verified) {
            let (a, b) = (root(&mut parent, index[w.f.as_str()]), root(&mut parent, index[w.g.as_str()]));
            parent[a.max(b)] = a.min(b);
        }
        let mut groups: BTreeMap<usize, CAClass> = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let r = root(&mut parent, i);
            groups.entry(r).or_insert_with(|| CAClass { members: Vec::new(), witnesses: Vec::new() }).members.push((*name).clone());
        }
        for w in self.witnesses.iter().filter(|w| w.verified) {
            let r = root(&mut parent, index[w.f.as_str()]);
            groups.get_mut(&r).expect("every root has a group").witnesses.push(w.name.clone());
        }
        groups.into_values().collect()
    }

    pub fn same_class(&self, f: &str, g: &str) -> bool {
        self.classes().iter().any(|c| c.members.iter().any(|m| m == f) && c.members.iter().any(|m| m == g))
    }

    /// `{"classes": [...], "witnesses": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "classes": self.classes(), "witnesses": self.witnesses })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> Registry {
        Registry::standard()
    }

    fn find(ws: &[CAWitness], name: &str) -> CAWitness {
        ws.iter().find(|w| w.name == name).unwrap().clone()
    }

    #[test]
    fn doubling_pair_verifies_both_ways() {
        let r = registry();
        let ws = standard_witnesses(&r);
        let w = find(&ws, "ca/factorial~factorial2");
        let (of, og) = (r.oracle("factorial").unwrap(), r.oracle("factorial2").unwrap());
        verify_ca(&w, of, og, 12, 100_000, None, None).unwrap();
        verify_ca(&w.swapped(), og, of, 12, 100_000, None, None).unwrap();
    }

    #[test]
    fn unrelated_pair_fails_on_values() {
        let r = registry();
        let ws = standard_witnesses(&r);
        let mut w = find(&ws, "ca/factorial~factorial2");
        w.g = "bitsum3".into();
        let err = verify_ca(&w, r.oracle("factorial").unwrap(), r.oracle("bitsum3").unwrap(), 5, 100_000, None, None)
            .unwrap_err();
        assert!(matches!(err, CAViolation::Value { n: 1, .. }));
    }

    #[test]
    fn composition_checks_the_middle() {
        let r = registry();
        let ws = standard_witnesses(&r);
        let a = find(&ws, "ca/factorial~factorial2");
        assert!(matches!(compose_witness(&a, &a), Err(CAError::MiddleMismatch { .. })));
        let c = compose_witness(&a, &find(&ws, "ca/factorial2~factorial4")).unwrap();
        assert_eq!((c.f.as_str(), c.g.as_str()), ("factorial", "factorial4"));
        assert_eq!(c.bound_fg.to_string(), "6*nlogn + 10");
    }

    #[test]
    fn ledger_partitions_by_verified_witnesses() {
        let r = registry();
        let ws = standard_witnesses(&r);
        let mut l = CAClassLedger::new();
        l.add_function("bitsum3");
        l.record(&find(&ws, "ca/factorial~factorial2"), true, 10);
        l.record(&find(&ws, "ca/factorial2~factorial4"), true, 10);
        let mut bogus = find(&ws, "ca/factorial~factorial2");
        bogus.g = "bitsum3".into();
        l.record(&bogus, false, 10);
        assert!(l.same_class("factorial", "factorial4"));
        assert!(!l.same_class("factorial", "bitsum3"));
        assert_eq!(l.classes().len(), 2);
        let json = l.to_json();
        let classes = json["classes"].as_array().unwrap();
        let fact = classes.iter().find(|c| c["members"][0] == "factorial").unwrap();
        assert_eq!(fact["witnesses"].as_array().unwrap().len(), 2);
    }
}
