use cirlab::analysis::{fit_powerlaw, TimingSeries};
use cirlab::combinators::ProgramHandle;
use cirlab::costvm::CostedProgram;
use cirlab::etm::{commit_steps, Oracle};
use cirlab::natural::{decode_bits, encode_bits, encode_symbols};
use cirlab::tm::{machines, run_word, scan_records, Symbol};
use cirlab::zoo::eca::eca_row;
use cirlab::zoo::lang::{oracle_langcount, Decider};
use cirlab::zoo::Registry;
use num_bigint::BigUint;
use proptest::prelude::*;

const BUDGET: u64 = 50_000_000;
/// Machines given arbitrary words need not halt.
const TM_BUDGET: u64 = 100_000;

fn tm_programs() -> Vec<ProgramHandle> {
    machines::all().into_iter().map(|m| ProgramHandle::tm(m.name().to_string(), m.name().to_string(), m)).collect()
}

fn costed_programs() -> Vec<ProgramHandle> {
    let r = Registry::standard();
    ["zoo/factorial.incremental", "zoo/pow3.restart", "zoo/bitsum3.enumerator", "zoo/eca110.direct"]
        .iter()
        .map(|n| r.program(n).unwrap())
        .collect()
}

fn emitter(values: Vec<u64>) -> ProgramHandle {
    ProgramHandle::costvm(CostedProgram::new("emitter", "list", 1, move |vm| {
        for v in &values {
            vm.emit_record(&BigUint::from(*v))?;
        }
        Ok(())
    }))
}

fn word(bits: &[bool]) -> Vec<Symbol> {
    bits.iter().map(|&b| Symbol::from_bit(b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_deterministic(n in 0u64..40, which in 0usize..4) {
        let p = &costed_programs()[which];
        let a = p.run(&[BigUint::from(n)], BUDGET).unwrap();
        let b = p.run(&[BigUint::from(n)], BUDGET).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tm_runs_are_deterministic(bits in proptest::collection::vec(any::<bool>(), 0..24), which in 0usize..6) {
        let p = &tm_programs()[which];
        let input = word(&bits);
        prop_assert_eq!(p.run_word(&input, TM_BUDGET).unwrap(), p.run_word(&input, TM_BUDGET).unwrap());
    }

    #[test]
    fn output_only_grows(n in 1u64..30, which in 0usize..4, cut in 0.0f64..1.0) {
        let t = costed_programs()[which].run(&[BigUint::from(n)], BUDGET).unwrap();
        let early = (t.total_steps as f64 * cut) as u64;
        let (a, b) = (t.output_at(early), t.output_at(t.total_steps));
        prop_assert!(b.starts_with(&a));
        prop_assert_eq!(b, t.output());
    }

    #[test]
    fn smaller_budgets_give_prefixes(bits in proptest::collection::vec(any::<bool>(), 1..20), which in 0usize..6, cut in 0.0f64..1.0) {
        let spec = machines::all().swap_remove(which);
        let input = word(&bits);
        let full = run_word(&spec, &input, TM_BUDGET).unwrap();
        let budget = ((full.total_steps as f64 * cut) as u64).max(1);
        let part = run_word(&spec, &input, budget).unwrap();
        prop_assert!(part.total_steps <= full.total_steps);
        prop_assert_eq!(part.halted, part.total_steps == full.total_steps && full.halted);
        prop_assert_eq!(part.output(), full.output_at(part.total_steps));
    }

    #[test]
    fn costed_budgets_give_prefixes(n in 1u64..25, which in 0usize..4, cut in 0.0f64..1.0) {
        let p = &costed_programs()[which];
        let full = p.run(&[BigUint::from(n)], BUDGET).unwrap();
        let budget = ((full.total_steps as f64 * cut) as u64).max(1);
        if budget < full.total_steps {
            let part = p.run(&[BigUint::from(n)], budget).unwrap();
            prop_assert!(!part.halted);
            prop_assert!(part.total_steps <= budget);
            prop_assert!(full.output().starts_with(&part.output()));
        }
    }

    #[test]
    fn naturals_roundtrip(x in 0u64..=(1u64 << 32)) {
        let v = BigUint::from(x);
        prop_assert_eq!(decode_bits(&encode_bits(&v)), v.clone());
        let t = emitter(vec![x]).run(&[BigUint::from(0u32)], BUDGET).unwrap();
        let recs = scan_records(&t);
        prop_assert_eq!(recs.len(), 1);
        prop_assert_eq!(recs[0].value(), v.clone());
        prop_assert_eq!(t.output()[1..].to_vec(), encode_symbols(&v));
    }

    /// Any record stream containing `f(1), ..., f(n)` in order as a
    /// subsequence has a commit sequence.
    #[test]
    fn greedy_commits_are_complete(n in 1u64..8, junk in proptest::collection::vec((0usize..8, 0u64..64), 0..20)) {
        let f = |i: u64| 100 + i * i;
        let mut stream: Vec<u64> = (1..=n).map(f).collect();
        for (pos, v) in junk {
            stream.insert(pos.min(stream.len()), v);
        }
        let t = emitter(stream).run(&[BigUint::from(0u32)], BUDGET).unwrap();
        let oracle = Oracle::new("f", move |i| BigUint::from(f(i)));
        let commits = commit_steps(&t, &oracle, n).unwrap();
        prop_assert_eq!(commits.len() as u64, n);
        prop_assert!(commits.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn langcount_is_monotone(n in 0u64..400, which in 0usize..3) {
        let d = Decider::ALL[which];
        let step = oracle_langcount(d, n + 1) - oracle_langcount(d, n);
        prop_assert!(step <= 1);
    }

    #[test]
    fn eca_support_stays_in_the_light_cone(rule in 0u8..=255, n in 0u64..40) {
        let row = eca_row(rule, n);
        if let Some((lo, hi)) = row.support() {
            prop_assert!(lo >= -(n as i64) && hi <= n as i64);
            prop_assert!((hi - lo + 1) as u64 <= 2 * n + 1);
        }
    }

    #[test]
    fn larger_budgets_repeat_halted_runs(n in 1u64..25, which in 0usize..4, extra in 1u64..10_000) {
        let p = &costed_programs()[which];
        let t = p.run(&[BigUint::from(n)], BUDGET).unwrap();
        prop_assert!(t.halted);
        prop_assert_eq!(p.run(&[BigUint::from(n)], t.total_steps).unwrap(), t.clone());
        prop_assert_eq!(p.run(&[BigUint::from(n)], t.total_steps + extra).unwrap(), t);
    }

    #[test]
    fn larger_budgets_repeat_halted_tm_runs(bits in proptest::collection::vec(any::<bool>(), 0..16), which in 0usize..6, extra in 1u64..10_000) {
        let spec = machines::all().swap_remove(which);
        let input = word(&bits);
        let t = run_word(&spec, &input, TM_BUDGET).unwrap();
        if t.halted {
            prop_assert_eq!(run_word(&spec, &input, t.total_steps + extra).unwrap(), t);
        }
    }

    #[test]
    fn every_emission_costs_a_step(n in 1u64..25, which in 0usize..4) {
        let t = costed_programs()[which].run(&[BigUint::from(n)], BUDGET).unwrap();
        prop_assert!(t.total_steps >= 1);
        prop_assert!(t.events.windows(2).all(|w| w[0].step < w[1].step));
        prop_assert!(t.events.iter().all(|e| e.step >= 1 && e.step <= t.total_steps));
    }

    #[test]
    fn fits_are_deterministic(ts in proptest::collection::vec(1u64..1_000_000, 8..40)) {
        let points: Vec<(u64, u64)> = ts.iter().enumerate().map(|(k, &t)| (2 + k as u64 * 3, t)).collect();
        let s = TimingSeries { program: "random".into(), points, truncated_at: None };
        let a = fit_powerlaw::<f64>(&s, None).unwrap();
        let b = fit_powerlaw::<f64>(&s.clone(), None).unwrap();
        prop_assert_eq!(a.exponent.to_bits(), b.exponent.to_bits());
        prop_assert_eq!(a, b);
    }
}
