use cirlab::analysis::{registry_best, theta_compare, InputFamily};
use cirlab::approx::{based_machine, efficiency_constant, identity_witness, verify_approximation};
use cirlab::combinators::{compose_serial, otimes, Backend, ProgramHandle};
use cirlab::costvm::{charge_audit, CostedProgram};
use cirlab::etm::verify_etm;
use cirlab::zoo::Registry;
use num_bigint::BigUint;

const BUDGET: u64 = 100_000_000;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn program(r: &Registry, name: &str) -> ProgramHandle {
    r.program(name).unwrap_or_else(|| panic!("no program `{name}`"))
}

#[test]
fn tm_and_costed_backends_agree() {
    let r = Registry::standard();
    for f in ["id", "increment", "const1"] {
        let e = r.entry(f).unwrap();
        let (tm, direct) = (e.program("tm").unwrap(), e.program("direct").unwrap());
        assert_eq!(tm.backend_tag(), "tm");
        for k in 1..=64 {
            let a = tm.evaluate(&[big(k)], BUDGET).unwrap().0;
            let b = direct.evaluate(&[big(k)], BUDGET).unwrap().0;
            assert_eq!(a, b, "{f} at {k}");
        }
    }
}

#[test]
fn tm_restart_enumerators_are_e_machines() {
    let r = Registry::standard();
    for f in ["id", "increment", "const1"] {
        let e = r.entry(f).unwrap();
        verify_etm(e.program("restart.tm").unwrap(), &e.oracle, 24, BUDGET).unwrap_or_else(|v| panic!("{f}: {v}"));
    }
}

#[test]
fn palcount_machine_counts_palindromes() {
    let r = Registry::standard();
    let e = r.entry("langcount.palindrome").unwrap();
    verify_etm(e.program("tm").unwrap(), &e.oracle, 40, BUDGET).unwrap();
}

#[test]
fn restart_falls_behind_incremental() {
    let r = Registry::standard();
    let e = r.entry("factorial").unwrap();
    let (restart, inc) = (e.program("restart").unwrap(), e.program("incremental").unwrap());
    let ratios: Vec<f64> = (4..=14)
        .map(|k| {
            let a = restart.evaluate(&[big(k)], BUDGET).unwrap().1 as f64;
            let b = inc.evaluate(&[big(k)], BUDGET).unwrap().1 as f64;
            a / b
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn serial_composition_examples() {
    let r = Registry::standard();
    let inc = program(&r, "zoo/increment.direct");
    let fact = program(&r, "zoo/factorial.direct");
    let (v, _) = compose_serial(&inc, &fact).evaluate(&[big(5)], BUDGET).unwrap();
    assert_eq!(v, big(121));

    let double = ProgramHandle::costvm(CostedProgram::new("double", "double", 1, |vm| {
        let v = vm.arg(0)?;
        let d = vm.shl(&v, 1)?;
        vm.emit_record(&d)
    }));
    let pow3 = program(&r, "zoo/pow3.direct");
    let composed = compose_serial(&double, &pow3);
    let (v, t) = composed.evaluate(&[big(4)], BUDGET).unwrap();
    assert_eq!(v, big(162));
    let t_m = pow3.evaluate(&[big(4)], BUDGET).unwrap().1;
    let t_p = double.evaluate(&[big(81)], BUDGET).unwrap().1;
    assert_eq!(t, t_m + 1 + t_p);
}

#[test]
fn factorial_programs_pass_the_charge_audit() {
    let r = Registry::standard();
    let inputs: Vec<Vec<BigUint>> = (1..=20).map(|k| vec![big(k)]).collect();
    for variant in ["direct", "incremental", "restart"] {
        let p = r.entry("factorial").unwrap().program(variant).unwrap().clone();
        let Backend::CostVm(costed) = p.backend() else { panic!("{variant} is not costed") };
        let report = charge_audit(costed, &inputs, BUDGET).unwrap();
        assert!(report.passed(), "{variant}: {:?}", report.violation_names());
    }
}

#[test]
fn every_value_program_names_its_function() {
    let r = Registry::standard();
    for name in r.program_names() {
        if name.starts_with("zoo/") {
            let f = r.function_of(&name).unwrap();
            assert!(r.entry(&f).is_some(), "{name} → {f}");
        }
    }
}

#[test]
fn verified_enumerators_take_at_least_n_steps() {
    let r = Registry::standard();
    for e in r.entries() {
        for p in e.enumerators() {
            let profiles = verify_etm(&p, &e.oracle, e.n_max.min(10), BUDGET).unwrap_or_else(|v| panic!("{}: {v}", p.name()));
            for prof in profiles {
                assert!(prof.total >= prof.n, "{} at {}", p.name(), prof.n);
                assert!(prof.deltas.iter().all(|&t| t >= 1), "{}", p.name());
            }
        }
    }
}

#[test]
fn every_enumerator_is_its_own_approximation() {
    let r = Registry::standard();
    let identity = program(&r, "helper/approx.identity");
    for e in r.entries() {
        for p in e.enumerators() {
            let w = identity_witness(&p, &e.oracle, &identity, &e.value_bits, 6, BUDGET).unwrap();
            verify_approximation(&w, &e.oracle, 6, BUDGET, None).unwrap_or_else(|v| panic!("{}: {v}", p.name()));
        }
    }
}

#[test]
fn daughters_and_based_machines_of_verified_witnesses() {
    let r = Registry::standard();
    let oracle = r.oracle("factorial").unwrap();
    let best = r.entry("factorial").unwrap().enumerators();
    for w in r.witnesses() {
        let Ok(report) = verify_approximation(w, oracle, 10, BUDGET, None) else { continue };
        verify_etm(&otimes(w), oracle, 10, BUDGET).unwrap_or_else(|v| panic!("{}: {v}", w.name));
        let based = based_machine(w);
        for k in 1..=10 {
            assert_eq!(based.evaluate(&[big(k)], BUDGET).unwrap().0, oracle.eval(k), "{} at {k}", w.name);
        }
        let ns: Vec<u64> = (1..=10).collect();
        let (_, eff) = registry_best(&best, &ns, BUDGET, InputFamily::Natural).unwrap();
        let c = efficiency_constant(&eff.best_series.points, &report.m_steps).unwrap();
        eprintln!("{}: T_eff ≤ {c:.3}·T(M) on 1..=10", w.name);
        assert!(c.is_finite() && c > 0.0);
    }
}

#[test]
fn enumerator_shaped_entries_are_theta_consistent() {
    let r = Registry::standard();
    let ns: Vec<u64> = (8..=64).step_by(4).collect();
    for f in ["bitsum3", "bitsum3_msb", "langcount.always", "langcount.palindrome", "langcount.equal01"] {
        let e = r.entry(f).unwrap();
        let (_, any) = registry_best(&e.any_programs(), &ns, BUDGET, InputFamily::Natural).unwrap();
        let (_, en) = registry_best(&e.enumerators(), &ns, BUDGET, InputFamily::Natural).unwrap();
        let cmp: cirlab::ThetaComparison = theta_compare(&any.best_series, &en.best_series, 4.0).unwrap();
        assert!(cmp.consistent, "{f}: {} vs {} in [{}, {}]", any.best, en.best, cmp.tail_min, cmp.tail_max);
    }
}

#[test]
fn backend_step_ratios_are_reported() {
    let r = Registry::standard();
    let e = r.entry("increment").unwrap();
    let (tm, direct) = (e.program("tm").unwrap(), e.program("direct").unwrap());
    let ratios: Vec<f64> = (1..=128)
        .map(|k| tm.evaluate(&[big(k)], BUDGET).unwrap().1 as f64 / direct.evaluate(&[big(k)], BUDGET).unwrap().1 as f64)
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    eprintln!("increment tm/costvm step ratio in [{lo:.3}, {hi:.3}], spread {:.3}", hi / lo);

    let e = r.entry("langcount.palindrome").unwrap();
    let (tm, costed) = (e.program("tm").unwrap(), e.program("enumerator").unwrap());
    for k in 1..=32 {
        let values = |p: &ProgramHandle| {
            let t = p.run(&[big(k)], BUDGET).unwrap();
            cirlab::tm::records(&t).unwrap().iter().map(|rec| rec.value()).collect::<Vec<_>>()
        };
        assert_eq!(values(tm).last(), values(costed).last(), "palcount at {k}");
    }
}
