//! One function per subcommand. Each returns the verdict to print; artifacts
//! go under the configured output directory.

use std::path::Path;

use cirlab::analogy::{falsifier_pair, standard_witnesses, timing_audit, verify_ca, CAClassLedger, CAWitness};
use cirlab::analysis::{appendix_b, fit_powerlaw, measure, registry_best, InputFamily, TimingSeries};
use cirlab::approx::{cir_falsifier, efficiency_constant, verify_approximation, ApproximationWitness, WitnessManifest};
use cirlab::bound::Bound;
use cirlab::combinators::ProgramHandle;
use cirlab::etm::{omega_nlogn_report, profile_independence, profiles_csv, verify_etm};
use cirlab::zoo::Registry;
use cirlab::{AppendixBReport, ExactAppendixBReport, FitReport};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::{artifact, loglog_svg, write_atomic, write_json, Verdict};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn range(c: &ExperimentConfig) -> (u64, u64) {
    (c.n_min, c.n_max)
}

fn program(r: &Registry, name: &str) -> Result<ProgramHandle, CliError> {
    r.program(name).ok_or_else(|| usage(format!("unknown program `{name}`; `cirlab report` lists the registry")))
}

fn need_programs(c: &ExperimentConfig) -> Result<(), CliError> {
    if c.programs.is_empty() {
        return Err(usage(format!("{} needs --program", c.experiment)));
    }
    Ok(())
}

fn function_of(r: &Registry, name: &str) -> Result<String, CliError> {
    r.function_of(name).ok_or_else(|| usage(format!("`{name}` does not compute a registered function")))
}

pub fn verify_etm_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    need_programs(c)?;
    let mut v = Verdict::new(c.experiment, c.programs.join(","), (1, c.n_max));
    for name in &c.programs {
        let p = program(r, name)?;
        let oracle = r.oracle(&function_of(r, name)?).expect("function_of returns registered functions");
        match verify_etm(&p, oracle, c.n_max, c.budget) {
            Ok(profiles) => {
                write_atomic(&artifact(&c.out, name, "etm.csv"), profiles_csv(&profiles).as_bytes())?;
                let independence = profile_independence(&profiles);
                let omega = omega_nlogn_report(&profiles);
                let report = json!({
                    "program": name,
                    "backend": p.backend_tag(),
                    "independence": independence,
                    "tail_glue": profiles.iter().map(|p| p.tail_glue()).max(),
                    "omega_nlogn": omega,
                });
                write_json(&artifact(&c.out, name, "etm.json"), &report)?;
                v.detail(report);
            }
            Err(violation) => v.fail(format!("etm: {name}: {violation}")),
        }
    }
    Ok(v)
}

/// A registry witness name, or a path to a manifest file.
fn load_witness(r: &Registry, spec: &str) -> Result<ApproximationWitness, CliError> {
    if let Some(w) = r.witness(spec) {
        return Ok(w.clone());
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(usage(format!("`{spec}` is neither a registered witness nor a manifest file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let manifest: WitnessManifest = text.parse().map_err(|e| usage(format!("{spec}: {e}")))?;
    r.resolve_manifest(&manifest).map_err(|e| usage(format!("{spec}: {e}")))
}

fn best_any(r: &Registry, function: &str, ns: &[u64], budget: u64) -> Option<TimingSeries> {
    let e = r.entry(function)?;
    registry_best(&e.any_programs(), ns, budget, InputFamily::Natural).ok().map(|(_, b)| b.best_series)
}

fn best_enumerator(r: &Registry, function: &str, ns: &[u64], budget: u64) -> Option<TimingSeries> {
    let e = r.entry(function)?;
    registry_best(&e.enumerators(), ns, budget, InputFamily::Natural).ok().map(|(_, b)| b.best_series)
}

pub fn verify_approx_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    let spec = c.witness.as_deref().ok_or_else(|| usage("verify-approx needs --witness"))?;
    let w = load_witness(r, spec)?;
    let oracle = r.oracle(&w.function).ok_or_else(|| usage(format!("unknown function `{}`", w.function)))?;
    let mut v = Verdict::new(c.experiment, &w.name, (1, c.n_max));
    let ns: Vec<u64> = (1..=c.n_max).collect();
    let best = best_any(r, &w.function, &ns, c.budget);
    match verify_approximation(&w, oracle, c.n_max, c.budget, best.as_ref().map(|s| s.points.as_slice())) {
        Ok(report) => {
            write_json(&artifact(&c.out, &w.name, "approx.json"), &report)?;
            let efficiency = best_enumerator(r, &w.function, &ns, c.budget)
                .and_then(|s| efficiency_constant(&s.points, &report.m_steps));
            v.detail(json!({
                "witness": report.witness,
                "bound": report.bound,
                "rho": report.rho,
                "admissibility": report.admissibility,
                "efficiency_constant": efficiency,
                "caveat": report.caveat,
            }));
        }
        Err(violation) => v.fail(format!("approx: {violation}")),
    }
    Ok(v)
}

fn ca_witness(r: &Registry, name: &str) -> Result<CAWitness, CliError> {
    let all = standard_witnesses(r);
    all.iter().find(|w| w.name == name).cloned().ok_or_else(|| {
        let names: Vec<&str> = all.iter().map(|w| w.name.as_str()).collect();
        usage(format!("unknown CA witness `{name}`; known: {}", names.join(", ")))
    })
}

pub fn verify_ca_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    let name = c.witness.as_deref().ok_or_else(|| usage("verify-ca needs --witness"))?;
    let w = ca_witness(r, name)?;
    let (of, og) = (r.oracle(&w.f).expect("standard witnesses"), r.oracle(&w.g).expect("standard witnesses"));
    let mut v = Verdict::new(c.experiment, &w.name, (1, c.n_max));
    let ns: Vec<u64> = (1..=c.n_max).collect();
    let (bf, bg) = (best_any(r, &w.f, &ns, c.budget), best_any(r, &w.g, &ns, c.budget));
    let mut ledger = CAClassLedger::new();
    match verify_ca(&w, of, og, c.n_max, c.budget, bf.as_ref(), bg.as_ref()) {
        Ok(report) => {
            ledger.record(&w, true, c.n_max);
            write_json(&artifact(&c.out, &w.name, "ca.json"), &report)?;
            v.detail(json!({
                "witness": report.witness,
                "admissibility_fg": report.admissibility_fg,
                "admissibility_gf": report.admissibility_gf,
                "caveat": report.caveat,
            }));
            let grid: Vec<u64> = c.ns().into_iter().filter(|&n| n >= 2).collect();
            match timing_audit(r, &w.f, &w.g, &grid, c.budget, c.tolerance) {
                Ok(audit) => v.detail(json!({
                    "theta_any_program": audit.any_program.consistent,
                    "theta_enumerator": audit.enumerator.consistent,
                    "best": audit.contenders.iter().map(|b| &b.best).collect::<Vec<_>>(),
                })),
                Err(e) => v.detail(format!("timing audit skipped: {e}")),
            }
        }
        Err(violation) => {
            ledger.record(&w, false, c.n_max);
            v.fail(format!("analogy: {violation}"));
        }
    }
    write_json(&artifact(&c.out, &w.name, "ledger.json"), &ledger.to_json())?;
    Ok(v)
}

pub fn measure_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    need_programs(c)?;
    let ns = c.ns();
    let mut v = Verdict::new(c.experiment, c.programs.join(","), range(c));
    for name in &c.programs {
        let p = program(r, name)?;
        let series = measure(&p, &ns, c.budget, r.input_family(name)).map_err(|e| usage(format!("analysis: {e}")))?;
        let csv = artifact(&c.out, name, "csv");
        write_atomic(&csv, series.to_csv().as_bytes())?;
        write_atomic(&artifact(&c.out, name, "svg"), loglog_svg(name, &series.points, None).as_bytes())?;
        if let Some(n) = series.truncated_at {
            v.fail(format!("analysis: {name} exhausted the budget of {} steps at n={n}", c.budget));
        }
        v.detail(json!({ "program": name, "points": series.points.len(), "csv": csv }));
    }
    Ok(v)
}

pub fn fit_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    let mut sources: Vec<TimingSeries> = Vec::new();
    for path in &c.series {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        sources.push(TimingSeries::from_csv(stem, &text).map_err(|e| usage(format!("{}: {e}", path.display())))?);
    }
    for name in &c.programs {
        let p = program(r, name)?;
        sources.push(measure(&p, &c.ns(), c.budget, r.input_family(name)).map_err(|e| usage(format!("analysis: {e}")))?);
    }
    if sources.is_empty() {
        return Err(usage("fit needs --series or --program"));
    }
    let target: Vec<&str> = sources.iter().map(|s| s.program.as_str()).collect();
    let mut v = Verdict::new(c.experiment, target.join(","), c.window.unwrap_or(range(c)));
    for s in &sources {
        match fit_powerlaw::<f64>(s, c.window) {
            Ok(report) => {
                let report: FitReport = report;
                write_json(&artifact(&c.out, &s.program, "fit.json"), &report)?;
                let line = (report.power.constant, report.power.exponent);
                write_atomic(&artifact(&c.out, &s.program, "fit.svg"), loglog_svg(&s.program, &s.points, Some(line)).as_bytes())?;
                v.detail(report);
            }
            Err(e) => v.fail(format!("analysis: {}: {e}", s.program)),
        }
    }
    Ok(v)
}

pub fn falsify_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    need_programs(c)?;
    let challenger = program(r, &c.programs[0])?;
    let function = function_of(r, &c.programs[0])?;
    let entry = r.entry(&function).expect("function_of returns registered functions");
    let ns = c.ns();
    let enumerator = match c.programs.get(1) {
        Some(name) => program(r, name)?,
        None => registry_best(&entry.enumerators(), &ns, c.budget, InputFamily::Natural)
            .map_err(|e| usage(format!("analysis: {e}")))?
            .0,
    };
    let mut v = Verdict::new(c.experiment, challenger.name(), range(c));
    match cir_falsifier(&entry.oracle, &challenger, &enumerator, &ns, c.budget, c.tolerance) {
        Ok(report) => {
            write_json(&artifact(&c.out, challenger.name(), "falsify.json"), &report)?;
            v.verdict = report.verdict.clone();
            v.detail(report);
        }
        Err(e) => v.fail(format!("approx: {e}")),
    }
    Ok(v)
}

pub fn appendix_b_cmd(c: &ExperimentConfig) -> Result<Verdict, CliError> {
    let form = c.form.as_deref().ok_or_else(|| usage("appendixB needs --form"))?;
    let bound: Bound = form.parse().map_err(|e| usage(format!("{e}")))?;
    let mut v = Verdict::new(c.experiment, bound.to_string(), (1, c.n_max));
    let name = format!("appendixB-{}", bound.to_string().replace(' ', ""));
    let report = if c.exact {
        appendix_b(&bound, c.n_max).map(|r: ExactAppendixBReport| {
            json!({
                "bound": r.bound,
                "n_max": r.n_max,
                "max_ratio": r.max_ratio.to_string(),
                "final_ratio": r.final_ratio.to_string(),
                "tail_non_increasing": r.tail_non_increasing,
            })
        })
    } else {
        appendix_b(&bound, c.n_max).map(|r: AppendixBReport| {
            json!({
                "bound": r.bound,
                "n_max": r.n_max,
                "max_ratio": r.max_ratio,
                "final_ratio": r.final_ratio,
                "tail_non_increasing": r.tail_non_increasing,
            })
        })
    };
    match report {
        Ok(report) => {
            write_json(&artifact(&c.out, &name, "json"), &report)?;
            v.detail(report);
        }
        Err(e) => v.fail(format!("analysis: {e}")),
    }
    Ok(v)
}

/// Registry listing, the CA class ledger over every standard witness, and
/// falsifier verdicts side by side for each non-reflexive pair.
pub fn report_cmd(r: &Registry, c: &ExperimentConfig) -> Result<Verdict, CliError> {
    let mut v = Verdict::new(c.experiment, "registry", (1, c.n_max));
    let mut ledger = CAClassLedger::new();
    for e in r.entries() {
        ledger.add_function(&e.function);
    }
    let witnesses = standard_witnesses(r);
    let mut pairs = Vec::new();
    for w in &witnesses {
        let (of, og) = (r.oracle(&w.f).expect("standard"), r.oracle(&w.g).expect("standard"));
        let n_max = c.n_max.min(r.entry(&w.f).map_or(c.n_max, |e| e.n_max));
        let ok = verify_ca(w, of, og, n_max, c.budget, None, None).is_ok();
        ledger.record(w, ok, n_max);
        if ok && w.f != w.g {
            let grid: Vec<u64> = (4..=40).collect();
            let side = match falsifier_pair(w, r, &grid, c.budget, c.tolerance) {
                Ok((a, b)) => json!({ "witness": w.name, w.f.clone(): a.verdict, w.g.clone(): b.verdict }),
                Err(e) => json!({ "witness": w.name, "error": e.to_string() }),
            };
            pairs.push(side);
        }
    }
    let programs = r.program_names();
    write_json(&c.out.join("ca_ledger.json"), &ledger.to_json())?;
    let report = json!({
        "programs": programs,
        "functions": r.entries().map(|e| json!({ "function": e.function, "n_max": e.n_max, "value_bits": e.value_bits.to_string(), "notes": e.notes })).collect::<Vec<_>>(),
        "classes": ledger.classes(),
        "falsifier_pairs": pairs,
    });
    write_json(&c.out.join("report.json"), &report)?;
    v.detail(json!({ "programs": programs.len(), "classes": ledger.classes().len(), "falsifier_pairs": pairs }));
    Ok(v)
}
