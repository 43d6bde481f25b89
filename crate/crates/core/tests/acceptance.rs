//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use cirlab::analogy::{compose_witness, standard_witnesses, timing_audit, verify_ca};
use cirlab::analysis::{appendix_b, fit_powerlaw, measure, InputFamily};
use cirlab::approx::{based_machine, cir_falsifier, verify_approximation};
use cirlab::bound::Bound;
use cirlab::combinators::otimes;
use cirlab::etm::{omega_nlogn_report, profile_independence, verify_etm, verify_one};
use cirlab::zoo::life::pattern;
use cirlab::zoo::{Registry, Role};
use cirlab::{AppendixBReport, ExactAppendixBReport, FitReport};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

const BUDGET: u64 = 2_000_000_000;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn steps(p: &cirlab::combinators::ProgramHandle, n: u64) -> Result<u64, String> {
    p.evaluate(&[BigUint::from(n)], BUDGET).map(|(_, t)| t).map_err(|e| e.to_string())
}

fn palindrome_gap(r: &Registry) -> Outcome {
    let ns: Vec<u64> = (1..=32).map(|k| 16 * k).collect();
    let mut exps = Vec::new();
    for name in ["tm/palindrome1", "tm/palindrome2"] {
        let p = r.program(name).ok_or("missing machine")?;
        let s = measure(&p, &ns, BUDGET, InputFamily::PalindromeWord).map_err(|e| e.to_string())?;
        let fit: FitReport = fit_powerlaw(&s, None).map_err(|e| e.to_string())?;
        exps.push(fit.exponent);
    }
    check(
        (1.8..=2.2).contains(&exps[0]) && (0.85..=1.2).contains(&exps[1]),
        format!("1-tape exponent {:.3} in [1.8, 2.2], 2-tape exponent {:.3} in [0.85, 1.2]", exps[0], exps[1]),
    )
}

fn etm_verification(r: &Registry) -> Outcome {
    let e = r.entry("factorial").ok_or("no factorial")?;
    let mut parts = Vec::new();
    let mut ok = true;
    for variant in ["restart", "incremental"] {
        let p = e.program(variant).ok_or("missing enumerator")?;
        let profiles = verify_etm(p, &e.oracle, 12, BUDGET).map_err(|v| format!("{variant}: {v}"))?;
        let indep = profile_independence(&profiles).independent;
        let sums_hold = profiles.iter().all(|p| p.deltas.iter().sum::<u64>() == *p.commit_steps.last().unwrap());
        let glue = profiles.iter().map(|p| p.tail_glue()).max().unwrap_or(0);
        ok &= indep && sums_hold && glue <= 32;
        parts.push(format!("{variant} ({}): independent={indep}, Σt_i=k_n(n) {sums_hold}, T-Σt_i ≤ {glue}", p.backend_tag()));
    }
    check(ok, parts.join("; "))
}

fn otimes_identity(r: &Registry) -> Outcome {
    let oracle = r.oracle("factorial").ok_or("no factorial")?;
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["approx/factorial.identity", "approx/factorial.doubled"] {
        let w = r.witness(name).ok_or("missing witness")?;
        let rep = verify_approximation(w, oracle, 12, BUDGET, None).map_err(|e| e.to_string())?;
        let daughter = otimes(w);
        let mut gaps = Vec::new();
        for n in 2..=12u64 {
            let t_m = rep.m_steps.iter().find(|p| p.0 == n).unwrap().1;
            let sum_p: u64 = rep.points.iter().filter(|p| p.n == n).map(|p| p.steps).sum();
            gaps.push(steps(&daughter, n)?.abs_diff(sum_p + t_m));
        }
        let same = gaps.iter().all(|&g| g == gaps[0]);
        ok &= same;
        parts.push(format!("{name}: c = {:?}", if same { vec![gaps[0]] } else { gaps }));
    }
    check(ok, parts.join("; "))
}

fn daughter_theta(r: &Registry) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["approx/factorial.identity", "approx/factorial.doubled"] {
        let w = r.witness(name).ok_or("missing witness")?;
        let daughter = otimes(w);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for n in 4..=12 {
            let ratio = steps(&daughter, n)? as f64 / steps(&w.m, n)? as f64;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        ok &= lo >= 1.0 && hi <= 4.0;
        parts.push(format!("{name}: ratio in [{lo:.3}, {hi:.3}]"));
    }
    check(ok, parts.join("; "))
}

fn based_sandwich(r: &Registry) -> Outcome {
    let oracle = r.oracle("factorial").ok_or("no factorial")?;
    let mut parts = Vec::new();
    let mut ok = true;
    for w in r.witnesses() {
        if verify_approximation(w, oracle, 12, BUDGET, None).is_err() {
            parts.push(format!("{} unverified, skipped", w.name));
            continue;
        }
        let based = based_machine(w);
        let mut worst_c = 0u64;
        for n in 1..=12 {
            let (t_m, t_b) = (steps(&w.m, n)?, steps(&based, n)?);
            ok &= t_m <= t_b;
            worst_c = worst_c.max(t_b.saturating_sub(t_m + w.bound.eval(n)));
        }
        ok &= worst_c <= cirlab::approx::BASED_GLUE;
        parts.push(format!("{}: T(M) ≤ T(based) ≤ T(M) + F + {worst_c}", w.name));
    }
    check(ok, parts.join("; "))
}

fn omega_evidence(r: &Registry) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for f in ["factorial", "pow3"] {
        let e = r.entry(f).ok_or("missing entry")?;
        for p in e.enumerators() {
            let profiles: Vec<_> = (8..=64u64)
                .into_par_iter()
                .map(|n| verify_one(&p, &e.oracle, n, BUDGET))
                .collect::<Result<_, _>>()
                .map_err(|v| v.to_string())?;
            let rep = omega_nlogn_report(&profiles).ok_or("too few points")?;
            ok &= rep.tail_min > 0.0 && !rep.decreasing;
            parts.push(format!("{}: tail min {:.3}, slope {:+.4}", p.name(), rep.tail_min, rep.tail_slope));
        }
    }
    check(ok, parts.join("; "))
}

fn appendix_b_checks() -> Outcome {
    let linear: Bound = "n".parse().unwrap();
    let exact: ExactAppendixBReport = appendix_b(&linear, 200).map_err(|e| e.to_string())?;
    let ones = exact.ratios.iter().all(|r| *r == BigRational::one());
    let square: Bound = "n^2".parse().unwrap();
    let sq: AppendixBReport = appendix_b(&square, 10_000).map_err(|e| e.to_string())?;
    let rel = (sq.final_ratio - 0.5).abs() / 0.5;
    let concave: Bound = "log".parse().unwrap();
    let rejected = appendix_b::<f64>(&concave, 1000).is_err();
    check(
        ones && rel <= 0.01 && rejected,
        format!(
            "F=n ratio exactly 1: {ones}; F=n² at 10⁴: {:.6} ({:.4}% from 1/2); concave rejected: {rejected}",
            sq.final_ratio,
            rel * 100.0
        ),
    )
}

fn eca_cost(r: &Registry) -> Outcome {
    let p = r.program("zoo/eca30.direct").ok_or("missing eca30")?;
    let ns: Vec<u64> = (1..=16).map(|k| 16 * k).collect();
    let s = measure(&p, &ns, BUDGET, InputFamily::Natural).map_err(|e| e.to_string())?;
    let fit: FitReport = fit_powerlaw(&s, None).map_err(|e| e.to_string())?;
    check((1.8..=2.2).contains(&fit.exponent), format!("rule 30 exponent {:.3} in [1.8, 2.2]", fit.exponent))
}

fn ca_properties(r: &Registry) -> Outcome {
    let ws = standard_witnesses(r);
    let mut reflexive = 0;
    for w in ws.iter().filter(|w| w.f == w.g) {
        let e = r.entry(&w.f).ok_or("missing entry")?;
        verify_ca(w, &e.oracle, &e.oracle, e.n_max, BUDGET, None, None).map_err(|v| format!("{}: {v}", w.name))?;
        reflexive += 1;
    }
    let find = |name: &str| ws.iter().find(|w| w.name == name).ok_or(format!("missing {name}"));
    let composed = compose_witness(find("ca/factorial~factorial2")?, find("ca/factorial2~factorial4")?)
        .map_err(|e| e.to_string())?;
    let (of, oh) = (r.oracle("factorial").unwrap(), r.oracle("factorial4").unwrap());
    let composed_ok = verify_ca(&composed, of, oh, 64, BUDGET, None, None).is_ok();
    let ns: Vec<u64> = (16..=64).step_by(4).collect();
    let audit = timing_audit(r, "factorial", "factorial2", &ns, BUDGET, 4.0).map_err(|e| e.to_string())?;
    let theta = audit.any_program.consistent && audit.enumerator.consistent;
    check(
        reflexive == r.entries().count() && composed_ok && theta,
        format!(
            "{reflexive} reflexive witnesses verified; composed witness verified: {composed_ok}; \
             Θ-consistent (any {:.3}..{:.3}, E {:.3}..{:.3}): {theta}",
            audit.any_program.tail_min, audit.any_program.tail_max, audit.enumerator.tail_min, audit.enumerator.tail_max
        ),
    )
}

/// Shortcut cost on even inputs against `SHORTCUT_C · log₂ n`.
const SHORTCUT_C: f64 = 5.0;

fn interleave_demo(r: &Registry) -> Outcome {
    let e = r.entry("interleave_factorial").ok_or("missing interleave")?;
    let shortcut = e.program("shortcut").ok_or("no shortcut")?;
    let enumerator = e.program("enumerator").ok_or("no enumerator")?;
    let ns: Vec<u64> = (4..=40).collect();
    let mut fast = true;
    let mut slow = true;
    for &m in ns.iter().filter(|m| *m % 2 == 0) {
        fast &= steps(shortcut, m)? as f64 <= SHORTCUT_C * (m as f64).log2();
        slow &= steps(enumerator, m)? >= m;
    }
    let rep = cir_falsifier(&e.oracle, shortcut, enumerator, &ns, BUDGET, 4.0).map_err(|e| e.to_string())?;
    let verdict_ok = rep.verdict == "strong form falsified, CIR-consistent pattern on odd indices";
    check(
        fast && slow && verdict_ok,
        format!(
            "even shortcut ≤ {SHORTCUT_C}·log₂ n: {fast}; E-machine ≥ n on even n: {slow}; verdict \"{}\"",
            rep.verdict
        ),
    )
}

fn zoo_agreement(r: &Registry) -> Outcome {
    let mut checked = 0usize;
    for e in r.entries() {
        for zp in &e.programs {
            let p = &zp.handle;
            match zp.role {
                Role::Step => continue,
                Role::Enumerator => {
                    verify_one(p, &e.oracle, e.n_max, BUDGET).map_err(|v| format!("{}: {v}", p.name()))?;
                }
                Role::Direct | Role::Shortcut => {
                    (1..=e.n_max).into_par_iter().try_for_each(|n| {
                        let (v, _) = p.evaluate(&[BigUint::from(n)], BUDGET).map_err(|err| format!("{}: {err}", p.name()))?;
                        if v == e.oracle.eval(n) {
                            Ok(())
                        } else {
                            Err(format!("{} at n={n}: {v} ≠ {}", p.name(), e.oracle.eval(n)))
                        }
                    })?;
                }
            }
            checked += 1;
        }
    }
    let block = pattern("block").unwrap();
    let blinker = pattern("blinker").unwrap();
    let corpus = block.step() == block && blinker.step() != blinker && blinker.step().step() == blinker;
    check(corpus, format!("{checked} programs agree with their oracles; block fixed, blinker period 2: {corpus}"))
}

fn main() -> ExitCode {
    let r = Registry::standard();
    let criteria: Vec<Criterion> = vec![
        ("palindrome model gap", Box::new(|| palindrome_gap(&r))),
        ("E-machine verification", Box::new(|| etm_verification(&r))),
        ("⊗ timing identity", Box::new(|| otimes_identity(&r))),
        ("daughter Θ", Box::new(|| daughter_theta(&r))),
        ("based-machine sandwich", Box::new(|| based_sandwich(&r))),
        ("Ω(n log n) evidence", Box::new(|| omega_evidence(&r))),
        ("Σ F(i)/i ratio", Box::new(appendix_b_checks)),
        ("ECA cost", Box::new(|| eca_cost(&r))),
        ("CA equivalence properties", Box::new(|| ca_properties(&r))),
        ("strong-CIR falsification demo", Box::new(|| interleave_demo(&r))),
        ("zoo oracle agreement", Box::new(|| zoo_agreement(&r))),
    ];
    let mut failed = 0;
    for (i, (label, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {label} ({secs:.1}s): {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
