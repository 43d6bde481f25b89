//! Enumerating machines: commit detection, range-bounded verification and
//! the `k_n(i)`, `t_i`, `T` bookkeeping.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::combinators::{ProgramError, ProgramHandle};
use crate::natural::encode_bits;
use crate::tm::{records, scan_records, ExecutionTrace, RecordViolation};

type EvalFn = dyn Fn(u64) -> BigUint + Send + Sync;

/// A slow, independent reference implementation of `f`. Values are cached.
#[derive(Clone)]
pub struct Oracle {
    name: String,
    eval: Arc<EvalFn>,
    cache: Arc<Mutex<HashMap<u64, BigUint>>>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Oracle({})", self.name)
    }
}

impl Oracle {
    pub fn new(name: impl Into<String>, eval: impl Fn(u64) -> BigUint + Send + Sync + 'static) -> Oracle {
        Oracle { name: name.into(), eval: Arc::new(eval), cache: Arc::default() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, n: u64) -> BigUint {
        if let Some(v) = self.cache.lock().expect("oracle cache poisoned").get(&n) {
            return v.clone();
        }
        let v = (self.eval)(n);
        self.cache.lock().expect("oracle cache poisoned").insert(n, v.clone());
        v
    }
}

/// Commit steps `k_n(i)`, deltas `t_i` and total `T` of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerationProfile {
    pub n: u64,
    pub commit_steps: Vec<u64>,
    pub deltas: Vec<u64>,
    pub total: u64,
}

impl EnumerationProfile {
    pub fn from_commits(n: u64, commit_steps: Vec<u64>, total: u64) -> Self {
        let deltas = commit_steps
            .iter()
            .scan(0u64, |prev, &k| {
                let d = k - *prev;
                *prev = k;
                Some(d)
            })
            .collect();
        EnumerationProfile { n, commit_steps, deltas, total }
    }

    /// `T - k_n(n)`: steps spent after the last commit.
    pub fn tail_glue(&self) -> u64 {
        self.total - self.commit_steps.last().copied().unwrap_or(0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no commit for f({i})")]
pub struct NoWitness {
    pub i: u64,
}

/// Earliest commit sequence for `f(1), ..., f(n)` in a trace.
///
/// A record commits the value it holds at the step its last bit is written,
/// and only once it is closed; partial contents never commit. Records are
/// matched greedily in order. Taking a match as early as possible never
/// blocks a later one, so the greedy scan finds a sequence whenever one
/// exists.
pub fn commit_steps(trace: &ExecutionTrace, oracle: &Oracle, n: u64) -> Result<Vec<u64>, NoWitness> {
    let mut out = Vec::with_capacity(n as usize);
    let mut want = 1u64;
    let mut target = (want <= n).then(|| encode_bits(&oracle.eval(want)));
    for rec in scan_records(trace) {
        let Some(t) = &target else { break };
        if rec.closed && rec.bits == *t {
            out.push(rec.complete_step());
            want += 1;
            target = (want <= n).then(|| encode_bits(&oracle.eval(want)));
        }
    }
    if want <= n {
        return Err(NoWitness { i: want });
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EtmViolation {
    #[error("n={n}: {error}")]
    Program { n: u64, error: ProgramError },
    #[error("n={n}: no halt within {budget} steps")]
    Budget { n: u64, budget: u64 },
    #[error("n={n}: malformed output: {violation}")]
    Records { n: u64, violation: RecordViolation },
    #[error("n={n}: condition (i) failed: final record is {got:?}, expected {expected}")]
    FinalRecord { n: u64, expected: BigUint, got: Option<BigUint> },
    #[error("n={n}: condition (ii) failed: {source}")]
    Commit { n: u64, source: NoWitness },
}

impl EtmViolation {
    pub fn n(&self) -> u64 {
        match self {
            EtmViolation::Program { n, .. }
            | EtmViolation::Budget { n, .. }
            | EtmViolation::Records { n, .. }
            | EtmViolation::FinalRecord { n, .. }
            | EtmViolation::Commit { n, .. } => *n,
        }
    }
}

/// Checks one input: halting, record structure, the final record, and the
/// commit sequence.
pub fn verify_one(
    program: &ProgramHandle,
    oracle: &Oracle,
    n: u64,
    budget: u64,
) -> Result<EnumerationProfile, EtmViolation> {
    let trace = program.run(&[BigUint::from(n)], budget).map_err(|error| EtmViolation::Program { n, error })?;
    if !trace.halted {
        return Err(EtmViolation::Budget { n, budget });
    }
    let recs = records(&trace).map_err(|violation| EtmViolation::Records { n, violation })?;
    let expected = oracle.eval(n);
    let last = recs.last().map(|r| (r.bits.clone(), r.value()));
    if last.as_ref().map(|(bits, _)| bits) != Some(&encode_bits(&expected)) {
        return Err(EtmViolation::FinalRecord { n, expected, got: last.map(|(_, v)| v) });
    }
    let commits = commit_steps(&trace, oracle, n).map_err(|source| EtmViolation::Commit { n, source })?;
    Ok(EnumerationProfile::from_commits(n, commits, trace.total_steps))
}

/// Verifies the E-machine conditions for every `n` in `1..=n_max`.
/// Passing is evidence on that range only.
pub fn verify_etm(
    program: &ProgramHandle,
    oracle: &Oracle,
    n_max: u64,
    budget: u64,
) -> Result<Vec<EnumerationProfile>, EtmViolation> {
    let results: Vec<_> = (1..=n_max).into_par_iter().map(|n| verify_one(program, oracle, n, budget)).collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub independent: bool,
    /// `(i, n, n')` with `k_n(i) ≠ k_n'(i)`.
    pub first_mismatch: Option<(u64, u64, u64)>,
}

/// Whether every commit step `k_n(i)` is the same for all profiled `n ≥ i`.
pub fn profile_independence(profiles: &[EnumerationProfile]) -> IndependenceReport {
    let mut reference: HashMap<u64, (u64, u64)> = HashMap::new();
    let mut sorted: Vec<&EnumerationProfile> = profiles.iter().collect();
    sorted.sort_by_key(|p| p.n);
    for p in sorted {
        for (idx, &k) in p.commit_steps.iter().enumerate() {
            let i = idx as u64 + 1;
            match reference.get(&i) {
                Some(&(k0, n0)) if k0 != k => {
                    return IndependenceReport { independent: false, first_mismatch: Some((i, n0, p.n)) }
                }
                Some(_) => {}
                None => {
                    reference.insert(i, (k, p.n));
                }
            }
        }
    }
    IndependenceReport { independent: true, first_mismatch: None }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    /// `(n, T(n) / (n log₂ n))` for `n ≥ 2`.
    pub points: Vec<(u64, f64)>,
    pub tail_from: u64,
    pub tail_min: f64,
    /// Least-squares slope of `c(n)` against `n` over the tail.
    pub tail_slope: f64,
    /// Set when the tail trend of `c(n)` is downward.
    pub decreasing: bool,
}

pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Empirical check of `T(n) = Ω(n log n)` over the profiled range.
/// Returns `None` with fewer than two usable points.
pub fn omega_nlogn_report(profiles: &[EnumerationProfile]) -> Option<OmegaReport> {
    let mut points: Vec<(u64, f64)> = profiles
        .iter()
        .filter(|p| p.n >= 2)
        .map(|p| (p.n, p.total as f64 / (p.n as f64 * (p.n as f64).log2())))
        .collect();
    points.sort_by_key(|p| p.0);
    if points.len() < 2 {
        return None;
    }
    let tail = &points[points.len() / 2..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let tail_slope = slope(&xs, &ys);
    let tail_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    Some(OmegaReport { tail_from: tail[0].0, tail_min, tail_slope, decreasing: tail_slope < 0.0, points })
}

/// Profiles as CSV with columns `n,i,k_n_i,t_i,total`.
pub fn profiles_csv(profiles: &[EnumerationProfile]) -> String {
    let mut out = String::from("n,i,k_n_i,t_i,total\n");
    for p in profiles {
        for (idx, (k, t)) in p.commit_steps.iter().zip(&p.deltas).enumerate() {
            out.push_str(&format!("{},{},{},{},{}\n", p.n, idx + 1, k, t, p.total));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::{Emission, Symbol};

    fn factorial() -> Oracle {
        Oracle::new("factorial", |n| (1..=n).map(BigUint::from).product())
    }

    fn trace_of(text: &str) -> ExecutionTrace {
        let events: Vec<Emission> = text
            .chars()
            .enumerate()
            .map(|(i, c)| Emission { step: i as u64 + 1, symbol: Symbol::from_char(c).unwrap() })
            .collect();
        ExecutionTrace { args: vec![], total_steps: events.len() as u64, events, halted: true, halt_state: None }
    }

    #[test]
    fn commits_at_final_bits() {
        let t = trace_of("#1#10#110");
        assert_eq!(commit_steps(&t, &factorial(), 3).unwrap(), vec![2, 5, 9]);
    }

    #[test]
    fn missing_first_value() {
        assert_eq!(commit_steps(&trace_of("#110"), &factorial(), 3).unwrap_err(), NoWitness { i: 1 });
        assert_eq!(commit_steps(&trace_of("#1"), &factorial(), 1).unwrap(), vec![2]);
    }

    #[test]
    fn prefixes_do_not_commit() {
        // "#10" contains the prefix "1" = f(1) but commits f(2) = 2 only
        assert_eq!(commit_steps(&trace_of("#10"), &factorial(), 2).unwrap_err(), NoWitness { i: 1 });
    }

    #[test]
    fn profile_bookkeeping() {
        let p = EnumerationProfile::from_commits(3, vec![2, 5, 9], 11);
        assert_eq!(p.deltas, vec![2, 3, 4]);
        assert_eq!(p.deltas.iter().sum::<u64>(), 9);
        assert_eq!(p.tail_glue(), 2);
    }

    #[test]
    fn independence_detects_padding() {
        let a = EnumerationProfile::from_commits(2, vec![2, 5], 5);
        let b = EnumerationProfile::from_commits(3, vec![2, 5, 9], 9);
        let c = EnumerationProfile::from_commits(4, vec![2, 6, 10, 14], 14);
        assert!(profile_independence(&[a.clone(), b.clone()]).independent);
        let r = profile_independence(&[a, b, c]);
        assert_eq!(r.first_mismatch, Some((2, 2, 4)));
    }

    #[test]
    fn omega_flags_linear_totals() {
        let profiles: Vec<_> = (2..=64u64)
            .map(|n| EnumerationProfile::from_commits(n, (1..=n).map(|i| 2 * i).collect(), 2 * n + 1))
            .collect();
        assert!(omega_nlogn_report(&profiles).unwrap().decreasing);
    }

    #[test]
    fn csv_layout() {
        let csv = profiles_csv(&[EnumerationProfile::from_commits(2, vec![2, 5], 6)]);
        assert_eq!(csv, "n,i,k_n_i,t_i,total\n2,1,2,2,6\n2,2,5,3,6\n");
    }
}
