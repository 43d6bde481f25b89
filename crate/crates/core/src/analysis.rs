//! Measurement and empirical asymptotics over charged step counts.
//!
//! Everything here is range evidence. A "Θ-consistent" verdict says the tail
//! of a measured ratio series stays inside a declared band; it proves nothing
//! about larger inputs.

use num_bigint::BigUint;
use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bound::Bound;
use crate::combinators::{ProgramError, ProgramHandle};
use crate::scalar::Scalar;
use crate::tm::Symbol;

/// How the measurement parameter `n` becomes a program input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InputFamily {
    /// The natural `n` itself.
    Natural,
    /// A palindromic word of length `n` on tape 0, the worst case for the
    /// palindrome deciders (they scan it completely).
    PalindromeWord,
}

/// The palindrome `0110 0110 ...` of length `len` used by [`InputFamily::PalindromeWord`].
pub fn palindrome_word(len: usize) -> Vec<Symbol> {
    let half: Vec<Symbol> = (0..len / 2).map(|i| Symbol::from_bit(matches!(i % 4, 1 | 2))).collect();
    let mut w = half.clone();
    if len % 2 == 1 {
        w.push(Symbol::One);
    }
    w.extend(half.iter().rev());
    w
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingSeries {
    pub program: String,
    /// `(n, T(n))`, `n` strictly increasing.
    pub points: Vec<(u64, u64)>,
    /// Smallest `n` whose run hit the budget; points stop before it.
    pub truncated_at: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("n={n}: {error}")]
    Program { n: u64, error: ProgramError },
    #[error("need at least {need} points in the window, have {have}")]
    TooFewPoints { need: usize, have: usize },
    #[error("series `{0}` and `{1}` share no n")]
    NoOverlap(String, String),
    #[error("bad CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("no candidate programs")]
    EmptyRegistry,
    #[error("every candidate hit the budget")]
    AllTruncated,
}

impl TimingSeries {
    pub fn ns(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.0).collect()
    }

    /// `n,steps` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,steps\n");
        for (n, t) in &self.points {
            out.push_str(&format!("{n},{t}\n"));
        }
        out
    }

    pub fn from_csv(program: impl Into<String>, text: &str) -> Result<TimingSeries, AnalysisError> {
        let mut points = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.starts_with('n')) {
                continue;
            }
            let err = |reason: &str| AnalysisError::Csv { line: idx + 1, reason: reason.into() };
            let (n, t) = line.split_once(',').ok_or_else(|| err("expected `n,steps`"))?;
            let n: u64 = n.trim().parse().map_err(|_| err("bad n"))?;
            let t: u64 = t.trim().parse().map_err(|_| err("bad steps"))?;
            if points.last().is_some_and(|&(prev, _)| prev >= n) {
                return Err(err("n must be strictly increasing"));
            }
            points.push((n, t));
        }
        Ok(TimingSeries { program: program.into(), points, truncated_at: None })
    }

    fn tail(&self) -> &[(u64, u64)] {
        &self.points[self.points.len() / 2..]
    }
}

/// Exact charged steps of `program` on each `n` in `ns` (sorted, deduplicated).
pub fn measure(
    program: &ProgramHandle,
    ns: &[u64],
    budget: u64,
    family: InputFamily,
) -> Result<TimingSeries, AnalysisError> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let runs: Vec<Result<(u64, u64, bool), AnalysisError>> = ns
        .par_iter()
        .map(|&n| {
            let trace = match family {
                InputFamily::Natural => program.run(&[BigUint::from(n)], budget),
                InputFamily::PalindromeWord => program.run_word(&palindrome_word(n as usize), budget),
            }
            .map_err(|error| AnalysisError::Program { n, error })?;
            Ok((n, trace.total_steps, trace.halted))
        })
        .collect();
    let mut points = Vec::new();
    let mut truncated_at = None;
    for r in runs {
        let (n, t, halted) = r?;
        if !halted {
            truncated_at = Some(n);
            break;
        }
        points.push((n, t));
    }
    Ok(TimingSeries { program: program.name().to_string(), points, truncated_at })
}

/// Geometric grid `lo, 2·lo, 4·lo, ... ≤ hi`.
pub fn doubling_grid(lo: u64, hi: u64) -> Vec<u64> {
    std::iter::successors(Some(lo.max(1)), |&n| n.checked_mul(2)).take_while(|&n| n <= hi).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitModel {
    /// `T ≈ c·n^a`
    Power,
    /// `T ≈ c·n^a·log₂ n`
    PowerLog,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit<S> {
    pub model: FitModel,
    pub exponent: S,
    pub constant: S,
    /// RMS residual of `ln T` against the model.
    pub residual: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport<S> {
    pub program: String,
    /// Model with the smaller residual.
    pub preferred: FitModel,
    /// Exponent of the pure power law, the usual headline number.
    pub exponent: S,
    pub power: ModelFit<S>,
    pub power_log: ModelFit<S>,
    pub window: (u64, u64),
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 8;

fn least_squares<S: Float>(xs: &[S], ys: &[S]) -> (S, S, S) {
    let k = S::from(xs.len()).unwrap();
    let mx = xs.iter().fold(S::zero(), |a, &x| a + x) / k;
    let my = ys.iter().fold(S::zero(), |a, &y| a + y) / k;
    let sxx = xs.iter().fold(S::zero(), |a, &x| a + (x - mx) * (x - mx));
    let sxy = xs.iter().zip(ys).fold(S::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
    let slope = if sxx == S::zero() { S::zero() } else { sxy / sxx };
    let icept = my - slope * mx;
    let sse = xs.iter().zip(ys).fold(S::zero(), |a, (&x, &y)| {
        let e = y - (icept + slope * x);
        a + e * e
    });
    (slope, icept, (sse / k).sqrt())
}

/// Least-squares fit of `ln T` on `ln n` for both models, over the points
/// with `n` in `window` (inclusive; the whole series if `None`). Points with
/// `n < 2` are skipped since `log₂ n` vanishes there.
pub fn fit_powerlaw<S: Float>(series: &TimingSeries, window: Option<(u64, u64)>) -> Result<FitReport<S>, AnalysisError> {
    let (lo, hi) = window.unwrap_or((0, u64::MAX));
    let pts: Vec<(u64, u64)> =
        series.points.iter().copied().filter(|&(n, t)| n >= 2 && t >= 1 && (lo..=hi).contains(&n)).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::TooFewPoints { need: MIN_FIT_POINTS, have: pts.len() });
    }
    let conv = |v: u64| S::from(v).unwrap();
    let xs: Vec<S> = pts.iter().map(|p| conv(p.0).ln()).collect();
    let ys: Vec<S> = pts.iter().map(|p| conv(p.1).ln()).collect();
    let ys_log: Vec<S> = pts.iter().map(|p| (conv(p.1) / conv(p.0).log2()).ln()).collect();
    let (mut a, b, r) = least_squares(&xs, &ys);
    if pts.iter().all(|p| p.1 == pts[0].1) {
        a = S::zero();
    }
    let (al, bl, rl) = least_squares(&xs, &ys_log);
    let power = ModelFit { model: FitModel::Power, exponent: a, constant: b.exp(), residual: r };
    let power_log = ModelFit { model: FitModel::PowerLog, exponent: al, constant: bl.exp(), residual: rl };
    let preferred = if rl < r { FitModel::PowerLog } else { FitModel::Power };
    Ok(FitReport {
        program: series.program.clone(),
        preferred,
        exponent: a,
        power,
        power_log,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaComparison<S> {
    pub left: String,
    pub right: String,
    /// `(n, T_left(n) / T_right(n))` over the common `n`.
    pub ratios: Vec<(u64, S)>,
    /// First `n` of the tail window, the upper half of the common points.
    pub tail_from: u64,
    pub tail_min: S,
    pub tail_max: S,
    pub tolerance: S,
    /// `tail_max ≤ tolerance · tail_min`.
    pub consistent: bool,
}

pub const DEFAULT_THETA_TOLERANCE: f64 = 4.0;

/// Ratio series of two timing series and its tail band.
pub fn theta_compare<S: Scalar>(
    left: &TimingSeries,
    right: &TimingSeries,
    tolerance: S,
) -> Result<ThetaComparison<S>, AnalysisError> {
    let ratios: Vec<(u64, S)> = left
        .points
        .iter()
        .filter_map(|&(n, t1)| {
            let &(_, t2) = right.points.iter().find(|p| p.0 == n)?;
            Some((n, S::from_u64_exact(t1) / S::from_u64_exact(t2.max(1))))
        })
        .collect();
    if ratios.is_empty() {
        return Err(AnalysisError::NoOverlap(left.program.clone(), right.program.clone()));
    }
    let tail = &ratios[ratios.len() / 2..];
    let pick = |better: fn(&S, &S) -> bool| {
        tail.iter().map(|r| &r.1).fold(tail[0].1.clone(), |acc, x| if better(x, &acc) { x.clone() } else { acc })
    };
    let tail_min = pick(|x, acc| x < acc);
    let tail_max = pick(|x, acc| x > acc);
    let consistent = tail_max <= tolerance.clone() * tail_min.clone();
    Ok(ThetaComparison {
        left: left.program.clone(),
        right: right.program.clone(),
        tail_from: tail[0].0,
        ratios,
        tail_min,
        tail_max,
        tolerance,
        consistent,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppendixBError {
    #[error("need n_max ≥ 3 to test convexity")]
    RangeTooSmall,
    #[error("`{0}` needs a logarithm, which this scalar type cannot represent")]
    NoLog(String),
    #[error("F(1) must be positive")]
    NotPositive,
    #[error("F is not convex: second difference at n={n} is {second_difference}")]
    NotConvex { n: u64, second_difference: f64 },
    #[error("F(n)/log₂ n falls over the tail (from {from} at n={tail_from} to {to} at n={n_max}), so F = Ω(log n) is not supported")]
    BelowLog { tail_from: u64, n_max: u64, from: f64, to: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppendixBReport<S> {
    pub bound: String,
    pub n_max: u64,
    /// `R(n) = (Σ_{i≤n} F(i)/i) / F(n)` for `n = 1..=n_max`.
    pub ratios: Vec<S>,
    pub max_ratio: S,
    pub final_ratio: S,
    /// `R` does not increase over the upper half of the range.
    pub tail_non_increasing: bool,
}

/// Relative slack on float comparisons in the precondition checks.
const FLOAT_SLACK: f64 = 1e-9;

/// Checks `Σ_{i≤n} F(i)/i = O(F(n))` numerically for a convex `F` with
/// `F = Ω(log n)`, after verifying both preconditions on `1..=n_max`.
pub fn appendix_b<S: Scalar>(bound: &Bound, n_max: u64) -> Result<AppendixBReport<S>, AppendixBError> {
    if n_max < 3 {
        return Err(AppendixBError::RangeTooSmall);
    }
    let values: Vec<S> = (1..=n_max)
        .map(|n| bound.eval_scalar(&S::from_u64_exact(n)).ok_or_else(|| AppendixBError::NoLog(bound.to_string())))
        .collect::<Result<_, _>>()?;
    let two = S::from_u64_exact(2);
    for idx in 1..values.len() - 1 {
        let d2 = values[idx + 1].clone() - two.clone() * values[idx].clone() + values[idx - 1].clone();
        let d2f = d2.to_f64_lossy();
        if d2f < -FLOAT_SLACK * values[idx].to_f64_lossy().abs().max(1.0) {
            return Err(AppendixBError::NotConvex { n: idx as u64 + 1, second_difference: d2f });
        }
    }
    if values[0] <= S::zero() {
        return Err(AppendixBError::NotPositive);
    }
    let tail_from = (n_max / 2).max(2);
    let per_log = |n: u64| values[n as usize - 1].to_f64_lossy() / (n as f64).log2();
    let (from, to) = (per_log(tail_from), per_log(n_max));
    if to < from * (1.0 - FLOAT_SLACK) {
        return Err(AppendixBError::BelowLog { tail_from, n_max, from, to });
    }

    let mut sum = S::zero();
    let mut ratios = Vec::with_capacity(values.len());
    for (i, f) in (1..=n_max).zip(&values) {
        sum = sum + f.clone() / S::from_u64_exact(i);
        ratios.push(sum.clone() / f.clone());
    }
    let max_ratio = ratios.iter().fold(ratios[0].clone(), |a, r| if *r > a { r.clone() } else { a });
    let tail = &ratios[(n_max / 2) as usize..];
    let tail_non_increasing = tail.windows(2).all(|w| w[1].to_f64_lossy() <= w[0].to_f64_lossy() * (1.0 + FLOAT_SLACK));
    Ok(AppendixBReport {
        bound: bound.to_string(),
        n_max,
        final_ratio: ratios[ratios.len() - 1].clone(),
        max_ratio,
        ratios,
        tail_non_increasing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Contender {
    pub program: String,
    /// Sum of `T(n)` over the tail window, `None` if the program hit the budget.
    pub tail_steps: Option<u64>,
    pub series: TimingSeries,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestReport {
    pub best: String,
    pub best_series: TimingSeries,
    pub contenders: Vec<Contender>,
    pub caveat: &'static str,
}

/// The candidate with the least total charged steps over the upper half of
/// `ns`. Candidates are all programs of one kind for one function, chosen by
/// the caller.
pub fn registry_best(
    candidates: &[ProgramHandle],
    ns: &[u64],
    budget: u64,
    family: InputFamily,
) -> Result<(ProgramHandle, BestReport), AnalysisError> {
    if candidates.is_empty() {
        return Err(AnalysisError::EmptyRegistry);
    }
    let mut contenders = Vec::with_capacity(candidates.len());
    for p in candidates {
        let series = measure(p, ns, budget, family)?;
        let complete = series.truncated_at.is_none();
        let tail_steps = complete.then(|| series.tail().iter().map(|p| p.1).sum());
        contenders.push(Contender { program: p.name().to_string(), tail_steps, series });
    }
    let (idx, best) = contenders
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.tail_steps.map(|t| (i, (t, c))))
        .min_by_key(|(_, (t, _))| *t)
        .map(|(i, (_, c))| (i, c.clone()))
        .ok_or(AnalysisError::AllTruncated)?;
    let report = BestReport {
        best: best.program.clone(),
        best_series: best.series,
        contenders,
        caveat: crate::approx::BEST_KNOWN_CAVEAT,
    };
    Ok((candidates[idx].clone(), report))
}
