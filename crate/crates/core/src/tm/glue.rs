//! Machine-level gluing for the restart enumerator.
//!
//! [`restart`] wraps a machine `M` into a machine that runs `M` on `1, 2, ..., n`
//! in turn, passing every emission of `M` straight through. The wrapper's tapes
//! are `[input, C, V, M's work tapes...]`: `C` counts calls, `V` is the
//! virtual input tape `M` reads instead of tape 0.
//!
//! `M` must be restartable: when it halts, its input head is back on the
//! first cell and its work tapes are blank. [`check_restartable`] tests that
//! on sample inputs.

use num_bigint::BigUint;
use thiserror::Error;

use super::{run_word_to_end, BuildError, MachineBuilder, MachineSpec, Move, RunError, Symbol};
use crate::natural::encode_symbols;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GlueError {
    #[error("`{machine}` on input {input} did not halt within the budget")]
    NoHalt { machine: String, input: BigUint },
    #[error("`{machine}` on input {input} left its input head at cell {head}")]
    InputHeadMoved { machine: String, input: BigUint, head: i64 },
    #[error("`{machine}` on input {input} left work tape {tape} non-blank")]
    DirtyTape { machine: String, input: BigUint, tape: usize },
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Runs `spec` on each input and checks the restartable contract.
pub fn check_restartable(
    spec: &MachineSpec,
    inputs: impl IntoIterator<Item = BigUint>,
    budget: u64,
) -> Result<(), GlueError> {
    for input in inputs {
        let (trace, config) = run_word_to_end(spec, &encode_symbols(&input), budget)?;
        let machine = spec.name().to_string();
        if !trace.halted {
            return Err(GlueError::NoHalt { machine, input });
        }
        if config.tapes[0].head() != 0 {
            return Err(GlueError::InputHeadMoved { machine, input, head: config.tapes[0].head() });
        }
        if let Some(tape) = (1..config.tapes.len()).find(|&t| !config.tapes[t].is_blank()) {
            return Err(GlueError::DirtyTape { machine, input, tape });
        }
    }
    Ok(())
}

/// Pattern helper for glue states: only the input, `C` and `V` columns vary,
/// `M`'s tapes are left alone.
struct Glue<'a> {
    b: &'a mut MachineBuilder,
    rest: usize,
}

impl Glue<'_> {
    fn rule(&mut self, state: &str, reads: &str, next: &str, writes: &str, moves: &str) {
        let reads = format!("{reads}{}", "*".repeat(self.rest));
        let writes = format!("{writes}{}", "=".repeat(self.rest));
        let moves = format!("{moves}{}", "S".repeat(self.rest));
        self.b.rule(state, &reads, next, &writes, &moves, '-');
    }
}

/// Builds the restart enumerator around a restartable machine.
pub fn restart(m: &MachineSpec) -> Result<MachineSpec, GlueError> {
    let k = m.work_tapes();
    let mut b = MachineBuilder::new(format!("restart-{}", m.name()), k + 2);
    b.start("g.init");
    let mut g = Glue { b: &mut b, rest: k };

    g.rule("g.init", "***", "g.cp", "1=", "SSS");
    // V := C
    g.rule("g.cp", "*0*", "g.cp", "=0", "SRR");
    g.rule("g.cp", "*1*", "g.cp", "=1", "SRR");
    g.rule("g.cp", "*_*", "g.rwc", "==", "SLL");
    g.rule("g.rwc", "*b*", "g.rwc", "==", "SLS");
    g.rule("g.rwc", "*_*", "g.rwv", "==", "SRS");
    g.rule("g.rwv", "**b", "g.rwv", "==", "SSL");
    g.rule("g.rwv", "**_", "g.cmp", "==", "SSR");
    // is this the last call (C = n)?
    g.rule("g.cmp", "00*", "g.cmp", "==", "RRS");
    g.rule("g.cmp", "11*", "g.cmp", "==", "RRS");
    g.rule("g.cmp", "__*", "g.eq", "==", "LLS");
    g.b.fallback("g.cmp", &"*".repeat(k + 3), "g.ne", &"=".repeat(k + 2), &format!("LL{}", "S".repeat(k + 1)), '-');
    for (tag, copy) in [("eq", "last"), ("ne", "more")] {
        let rin = format!("g.{tag}");
        let rc = format!("g.{tag}.c");
        g.rule(&rin, "b**", &rin, "==", "LSS");
        g.rule(&rin, "_**", &rc, "==", "RSS");
        g.rule(&rc, "*b*", &rc, "==", "SLS");
        let entry = format!("{copy}.{}", m.state_name(m.start()));
        g.rule(&rc, "*_*", &entry, "==", "SRS");
    }
    // after a non-final call: erase V, then C += 1
    g.rule("g.ev", "**b", "g.ev", "=_", "SSR");
    g.rule("g.ev", "**_", "g.inc", "==", "SSS");
    g.rule("g.inc", "*b*", "g.inc", "==", "SRS");
    g.rule("g.inc", "*_*", "g.ic", "==", "SLS");
    g.rule("g.ic", "*1*", "g.ic", "0=", "SLS");
    g.rule("g.ic", "*0*", "g.ir", "1=", "SLS");
    g.rule("g.ic", "*_*", "g.ir", "1=", "SLS");
    g.rule("g.ir", "*b*", "g.ir", "==", "SLS");
    g.rule("g.ir", "*_*", "g.cp", "==", "SRS");

    for copy in ["last", "more"] {
        let ids: Vec<_> = m.states().iter().map(|s| b.state(&format!("{copy}.{s}"))).collect();
        for h in m.halting_states() {
            let name = format!("{copy}.{}", m.state_name(h));
            if copy == "last" {
                b.halt(&name);
            } else {
                let mut g = Glue { b: &mut b, rest: k };
                g.rule(&name, "***", "g.ev", "==", "SSS");
            }
        }
        for (state, reads, tr) in m.transitions() {
            for x in Symbol::ALL {
                for c in Symbol::ALL {
                    let mut r = vec![x, c];
                    r.extend(&reads);
                    let mut w = vec![c, reads[0]];
                    w.extend(&tr.writes);
                    let mut mv = vec![Move::Stay, Move::Stay];
                    mv.extend(&tr.moves);
                    b.concrete(ids[state as usize], r, ids[tr.next as usize], w, mv, tr.output);
                }
            }
        }
    }
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tm::{machines, records, run};

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn builtins_are_restartable() {
        for spec in [machines::emit1(), machines::identity(), machines::increment()] {
            check_restartable(&spec, (1..40u64).map(n), 100_000).unwrap();
        }
    }

    #[test]
    fn palindrome1_is_not_restartable() {
        let err = check_restartable(&machines::palindrome1(), [n(5)], 100_000).unwrap_err();
        assert!(matches!(err, GlueError::InputHeadMoved { .. } | GlueError::DirtyTape { .. }));
    }

    #[test]
    fn restart_identity_enumerates_one_to_n() {
        let r = restart(&machines::identity()).unwrap();
        for v in 1..=9u64 {
            let t = run(&r, &n(v), 1_000_000).unwrap();
            assert!(t.halted);
            let vals: Vec<BigUint> = records(&t).unwrap().iter().map(|r| r.value()).collect();
            assert_eq!(vals, (1..=v).map(n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn restart_increment_emits_successors() {
        let r = restart(&machines::increment()).unwrap();
        let t = run(&r, &n(5), 1_000_000).unwrap();
        assert_eq!(t.output_string(), "#10#11#100#101#110");
    }
}
