//! Approximations of enumerating machines, machines based on them, and the
//! CIR falsification harness.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bound::{Bound, BoundParseError};
use crate::combinators::{ProgramError, ProgramHandle};
use crate::costvm::{CallMode, CostedProgram, Stop};
use crate::etm::Oracle;
use crate::tm::scan_records;

/// Which output record of `M(n)` serves as `r'_{n,i}`. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RecordRule {
    /// `ρ(n, i) = i`.
    RecordI,
    /// `ρ(n, i)` = the last record `M(n)` writes, for every `i`.
    FinalRecord,
    /// Explicit `(n, i) -> record` entries.
    Table(BTreeMap<(u64, u64), usize>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RhoError {
    #[error("ρ({n},{i}) = {index} but M({n}) wrote only {count} record(s)")]
    OutOfRange { n: u64, i: u64, index: usize, count: usize },
    #[error("ρ({n},{i}) missing from table")]
    Missing { n: u64, i: u64 },
    #[error("ρ({n},·) decreases at i={i}")]
    NotMonotone { n: u64, i: u64 },
    #[error("ρ({n},{n}) = {index} is not the final record {count}")]
    NotFinal { n: u64, index: usize, count: usize },
}

impl RecordRule {
    pub fn designate(&self, n: u64, i: u64, record_count: usize) -> Result<usize, RhoError> {
        let index = match self {
            RecordRule::RecordI => i as usize,
            RecordRule::FinalRecord => record_count,
            RecordRule::Table(t) => *t.get(&(n, i)).ok_or(RhoError::Missing { n, i })?,
        };
        if index == 0 || index > record_count {
            return Err(RhoError::OutOfRange { n, i, index, count: record_count });
        }
        Ok(index)
    }

    /// Checks monotonicity in `i` and `ρ(n, n) = final` for one `n`.
    pub fn check(&self, n: u64, record_count: usize) -> Result<Vec<usize>, RhoError> {
        let idx: Vec<usize> = (1..=n).map(|i| self.designate(n, i, record_count)).collect::<Result<_, _>>()?;
        if let Some(p) = idx.windows(2).position(|w| w[1] < w[0]) {
            return Err(RhoError::NotMonotone { n, i: p as u64 + 2 });
        }
        if let Some(&last) = idx.last() {
            if last != record_count {
                return Err(RhoError::NotFinal { n, index: last, count: record_count });
            }
        }
        Ok(idx)
    }

    pub fn label(&self) -> String {
        match self {
            RecordRule::RecordI => "record-i".into(),
            RecordRule::FinalRecord => "final-record-so-far".into(),
            RecordRule::Table(_) => "table".into(),
        }
    }
}

impl FromStr for RecordRule {
    type Err = String;

    /// `record-i`, `final-record-so-far`, or a table `n:i=r,n:i=r,...`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "record-i" => Ok(RecordRule::RecordI),
            "final-record-so-far" | "final-record" => Ok(RecordRule::FinalRecord),
            other => {
                let mut t = BTreeMap::new();
                for entry in other.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                    let parsed = entry.split_once('=').and_then(|(key, r)| {
                        let (n, i) = key.split_once(':')?;
                        Some(((n.trim().parse().ok()?, i.trim().parse().ok()?), r.trim().parse().ok()?))
                    });
                    let (key, r) = parsed.ok_or_else(|| format!("bad ρ table entry `{entry}`"))?;
                    t.insert(key, r);
                }
                if t.is_empty() {
                    return Err(format!("unknown ρ rule `{other}`"));
                }
                Ok(RecordRule::Table(t))
            }
        }
    }
}

/// `(M, P, F, ρ)`: `P(n, i, r'_{n,i})` yields `f(i)` within `F(i)` steps.
#[derive(Debug, Clone)]
pub struct ApproximationWitness {
    pub name: String,
    pub function: String,
    pub m: ProgramHandle,
    pub p: ProgramHandle,
    pub bound: Bound,
    pub rho: RecordRule,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxPoint {
    pub n: u64,
    pub i: u64,
    pub record: usize,
    pub steps: u64,
    pub bound: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxReport {
    pub witness: String,
    pub function: String,
    pub bound: String,
    pub rho: String,
    pub n_max: u64,
    /// `T(M(n))` for `n = 1..=n_max`.
    pub m_steps: Vec<(u64, u64)>,
    pub points: Vec<ApproxPoint>,
    /// `(n, F(n)·n / T_best(n))` against the best-known program, if one was given.
    pub admissibility: Vec<(u64, f64)>,
    pub caveat: &'static str,
}

pub const BEST_KNOWN_CAVEAT: &str =
    "T_best is the fastest program in the registry, a best-known stand-in for an optimal machine";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxViolation {
    #[error("n={n}: {error}")]
    Program { n: u64, error: ProgramError },
    #[error("n={n}: M did not halt within the budget")]
    NoHalt { n: u64 },
    #[error(transparent)]
    Rho(#[from] RhoError),
    #[error("n={n}, i={i}: P produced {got:?}, expected {expected}")]
    Value { n: u64, i: u64, expected: BigUint, got: Option<BigUint> },
    #[error("n={n}, i={i}: P took {steps} steps, bound F({i}) = {bound}")]
    Bound { n: u64, i: u64, steps: u64, bound: u64 },
}

fn check_n(
    w: &ApproximationWitness,
    oracle: &Oracle,
    n: u64,
    budget: u64,
) -> Result<(u64, Vec<ApproxPoint>), ApproxViolation> {
    let trace = w.m.run(&[BigUint::from(n)], budget).map_err(|error| ApproxViolation::Program { n, error })?;
    if !trace.halted {
        return Err(ApproxViolation::NoHalt { n });
    }
    let recs = scan_records(&trace);
    let idx = w.rho.check(n, recs.len())?;
    let mut points = Vec::with_capacity(n as usize);
    for (i, record) in (1..=n).zip(idx) {
        let r = recs[record - 1].value();
        let p_trace = w
            .p
            .run(&[BigUint::from(n), BigUint::from(i), r], budget)
            .map_err(|error| ApproxViolation::Program { n, error })?;
        let expected = oracle.eval(i);
        let got = p_trace.halted.then(|| p_trace.final_value()).flatten();
        if got.as_ref() != Some(&expected) {
            return Err(ApproxViolation::Value { n, i, expected, got });
        }
        let bound = w.bound.eval(i);
        if p_trace.total_steps > bound {
            return Err(ApproxViolation::Bound { n, i, steps: p_trace.total_steps, bound });
        }
        points.push(ApproxPoint { n, i, record, steps: p_trace.total_steps, bound });
    }
    Ok((trace.total_steps, points))
}

/// Verifies the witness for every `n ≤ n_max` and `i ≤ n`. With `best`, also
/// reports the admissibility ratio `F(n)·n / T_best(n)` (no pass/fail).
pub fn verify_approximation(
    w: &ApproximationWitness,
    oracle: &Oracle,
    n_max: u64,
    budget: u64,
    best: Option<&[(u64, u64)]>,
) -> Result<ApproxReport, ApproxViolation> {
    let per_n: Vec<_> = (1..=n_max).into_par_iter().map(|n| check_n(w, oracle, n, budget)).collect();
    let mut m_steps = Vec::new();
    let mut points = Vec::new();
    for (n, r) in (1..=n_max).zip(per_n) {
        let (t, pts) = r?;
        m_steps.push((n, t));
        points.extend(pts);
    }
    let admissibility = best
        .unwrap_or(&[])
        .iter()
        .filter(|(n, t)| *n >= 1 && *t > 0)
        .map(|&(n, t)| (n, w.bound.eval(n) as f64 * n as f64 / t as f64))
        .collect();
    Ok(ApproxReport {
        witness: w.name.clone(),
        function: w.function.clone(),
        bound: w.bound.to_string(),
        rho: w.rho.label(),
        n_max,
        m_steps,
        points,
        admissibility,
        caveat: BEST_KNOWN_CAVEAT,
    })
}

/// Steps the based machine adds on top of `T(M(n)) + steps_P(n, n)`.
pub const BASED_GLUE: u64 = 1;

/// Machine computing `f` based on the approximation: runs `M(n)` (output
/// passed through), then `P(n, n, r_{n,ρ(n,n)})`, whose `#f(n)` becomes the
/// final record.
pub fn based_machine(w: &ApproximationWitness) -> ProgramHandle {
    let w = w.clone();
    let name = format!("based({})", w.name);
    ProgramHandle::costvm(CostedProgram::new(name, w.function.clone(), 1, move |vm| {
        let n_arg = vm.args()[0].clone();
        let n: u64 = u64::try_from(&n_arg).map_err(|_| Stop::Fault("input too large".into()))?;
        let trace = vm.call(&w.m, std::slice::from_ref(&n_arg), CallMode::Pass)?;
        let recs = scan_records(&trace);
        let idx = w.rho.designate(n, n, recs.len()).map_err(|e| Stop::Fault(e.to_string()))?;
        vm.tick()?;
        vm.call(&w.p, &[n_arg, BigUint::from(n), recs[idx - 1].value()], CallMode::Pass)?;
        Ok(())
    }))
}

/// Reads an E-machine as an approximation of its own function: `M` is the
/// E-machine, `P` the record identity, and `ρ(n, i)` the record that commits
/// `f(i)` in the run on `n`. The identity helper re-emits a `w`-bit record in
/// `2w + 1` steps, so the bound is `2·value_bits + 1`.
pub fn identity_witness(
    enumerator: &ProgramHandle,
    oracle: &Oracle,
    identity: &ProgramHandle,
    value_bits: &Bound,
    n_max: u64,
    budget: u64,
) -> Result<ApproximationWitness, crate::etm::EtmViolation> {
    let mut table = BTreeMap::new();
    for n in 1..=n_max {
        let profile = crate::etm::verify_one(enumerator, oracle, n, budget)?;
        let trace = enumerator.run(&[BigUint::from(n)], budget).expect("verify_one ran it");
        let recs = scan_records(&trace);
        let mut next = 0;
        for (i, k) in (1..=n).zip(&profile.commit_steps) {
            // the committing record is the first closed one at or after the previous match
            let idx = (next..recs.len()).find(|&j| recs[j].closed && recs[j].complete_step() == *k).expect("commit is a record");
            table.insert((n, i), idx + 1);
            next = idx + 1;
        }
    }
    Ok(ApproximationWitness {
        name: format!("identity({})", enumerator.name()),
        function: oracle.name().to_string(),
        m: enumerator.clone(),
        p: identity.clone(),
        bound: value_bits.scaled(2).plus(&Bound::constant(1)),
        rho: RecordRule::Table(table),
    })
}

/// `max_n T_eff(n) / T(M(n))` over the common `n`: the constant by which the
/// best-known E-machine stays within the approximation's own running time.
pub fn efficiency_constant(best_enumerator: &[(u64, u64)], m_steps: &[(u64, u64)]) -> Option<f64> {
    best_enumerator
        .iter()
        .filter_map(|&(n, te)| m_steps.iter().find(|p| p.0 == n && p.1 > 0).map(|&(_, tm)| te as f64 / tm as f64))
        .reduce(f64::max)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FalsifierError {
    #[error("challenger is wrong at n={n}: got {got:?}, expected {expected}")]
    Incorrect { n: u64, expected: BigUint, got: Option<BigUint> },
    #[error("n={n}: {error}")]
    Program { n: u64, error: ProgramError },
    #[error("need at least 4 points per parity class")]
    TooFewPoints,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassEvidence {
    pub class: &'static str,
    pub tail_from: u64,
    pub tail_min: f64,
    pub tail_max: f64,
    /// Least-squares slope of `log r` against `log n` over the tail.
    pub tail_slope: f64,
    /// Tail spread within the tolerance.
    pub bounded: bool,
    /// Tail spread beyond the tolerance with a clearly rising trend.
    pub growing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FalsifierReport {
    pub function: String,
    pub challenger: String,
    pub enumerator: String,
    /// `(n, T_eff(n), T_challenger(n), ratio)`.
    pub series: Vec<(u64, u64, u64, f64)>,
    pub classes: Vec<ClassEvidence>,
    pub verdict: String,
    pub caveat: &'static str,
}

pub const RANGE_CAVEAT: &str = "evidence on the tested range only; no finite range proves or refutes CIR";

/// Minimum log-log slope for a ratio series to count as growing.
pub const GROWTH_SLOPE: f64 = 0.5;

fn class_evidence(class: &'static str, pts: &[(u64, f64)], tolerance: f64) -> ClassEvidence {
    let tail = &pts[pts.len() / 2..];
    let tail_min = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let tail_max = tail.iter().map(|p| p.1).fold(0.0, f64::max);
    let xs: Vec<f64> = tail.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let tail_slope = crate::etm::slope(&xs, &ys);
    let spread = tail_max / tail_min;
    ClassEvidence {
        class,
        tail_from: tail[0].0,
        tail_min,
        tail_max,
        tail_slope,
        bounded: spread <= tolerance,
        growing: spread > tolerance && tail_slope >= GROWTH_SLOPE,
    }
}

/// Compares a challenger for `f` against the best-known E-machine.
///
/// The ratio `T_eff(n) / T_challenger(n)` is split into even and odd `n`.
/// A class whose tail ratio keeps growing is evidence that the challenger
/// beats every approximation-based computation there; a class whose tail
/// ratio stays within `tolerance` is the pattern CIR predicts.
pub fn cir_falsifier(
    oracle: &Oracle,
    challenger: &ProgramHandle,
    best_enumerator: &ProgramHandle,
    ns: &[u64],
    budget: u64,
    tolerance: f64,
) -> Result<FalsifierReport, FalsifierError> {
    let rows: Vec<Result<(u64, u64, u64), FalsifierError>> = ns
        .par_iter()
        .map(|&n| {
            let arg = [BigUint::from(n)];
            let ch = challenger.run(&arg, budget).map_err(|error| FalsifierError::Program { n, error })?;
            let expected = oracle.eval(n);
            let got = ch.halted.then(|| ch.final_value()).flatten();
            if got.as_ref() != Some(&expected) {
                return Err(FalsifierError::Incorrect { n, expected, got });
            }
            let (_, t_eff) =
                best_enumerator.evaluate(&arg, budget).map_err(|error| FalsifierError::Program { n, error })?;
            Ok((n, t_eff, ch.total_steps))
        })
        .collect();
    let mut series = Vec::with_capacity(rows.len());
    for r in rows {
        let (n, te, tc) = r?;
        series.push((n, te, tc, te as f64 / tc as f64));
    }
    series.sort_by_key(|s| s.0);
    let pick = |keep: &dyn Fn(u64) -> bool| -> Vec<(u64, f64)> {
        series.iter().filter(|s| keep(s.0)).map(|s| (s.0, s.3)).collect()
    };
    let all = pick(&|_| true);
    let even = pick(&|n| n % 2 == 0);
    let odd = pick(&|n| n % 2 == 1);
    if even.len() < 4 || odd.len() < 4 {
        return Err(FalsifierError::TooFewPoints);
    }
    let classes = vec![
        class_evidence("all", &all, tolerance),
        class_evidence("even", &even, tolerance),
        class_evidence("odd", &odd, tolerance),
    ];
    let (a, e, o) = (&classes[0], &classes[1], &classes[2]);
    let verdict = if a.bounded && e.bounded && o.bounded {
        "CIR-consistent".to_string()
    } else if e.growing && o.growing {
        "strong form falsified on range, no CIR-consistent subsequence".to_string()
    } else if e.growing && o.bounded {
        "strong form falsified, CIR-consistent pattern on odd indices".to_string()
    } else if o.growing && e.bounded {
        "strong form falsified, CIR-consistent pattern on even indices".to_string()
    } else {
        "inconclusive".to_string()
    };
    Ok(FalsifierReport {
        function: oracle.name().to_string(),
        challenger: challenger.name().to_string(),
        enumerator: best_enumerator.name().to_string(),
        series,
        classes,
        verdict,
        caveat: RANGE_CAVEAT,
    })
}

/// The text form of a witness: registry names plus the bound and ρ rule.
///
/// ```text
/// name = approx/factorial.doubled
/// function = factorial
/// m = zoo/factorial2.incremental
/// p = helper/approx.halve
/// bound = 3*nlogn + 4
/// rho = record-i
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessManifest {
    pub name: String,
    pub function: String,
    pub m: String,
    pub p: String,
    pub bound: Bound,
    pub rho: RecordRule,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ManifestError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error(transparent)]
    Bound(#[from] BoundParseError),
    #[error("{0}")]
    Rho(String),
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, usize> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(idx + 1)?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl FromStr for WitnessManifest {
    type Err = ManifestError;

    fn from_str(text: &str) -> Result<Self, ManifestError> {
        let mut kv = parse_key_values(text).map_err(|line| ManifestError::Syntax { line })?;
        let mut take = |k: &'static str| kv.remove(k).ok_or(ManifestError::Missing(k));
        let name = take("name")?;
        let function = take("function")?;
        let m = take("m")?;
        let p = take("p")?;
        let bound = take("bound")?.parse()?;
        let rho = take("rho")?.parse().map_err(ManifestError::Rho)?;
        if let Some(k) = kv.into_keys().next() {
            return Err(ManifestError::UnknownKey(k));
        }
        Ok(WitnessManifest { name, function, m, p, bound, rho })
    }
}
