//! Word counts: `f(n)` = how many of the first `n` words of `{0,1}*` a
//! decider accepts.
//!
//! Words are ordered by length, then lexicographically with `0 < 1`, starting
//! with the empty word. Word `w_i` is the binary expansion of `i` with its
//! leading `1` removed, which the programs use and the oracle does not.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{arg_u64, n, succ, Role, ZooEntry};
use crate::combinators::{restart_enumerator, ProgramHandle};
use crate::costvm::{CostedProgram, Step, Vm};
use crate::etm::Oracle;
use crate::tm::machines;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decider {
    Always,
    Palindrome,
    Equal01,
}

impl Decider {
    pub const ALL: [Decider; 3] = [Decider::Always, Decider::Palindrome, Decider::Equal01];

    pub fn name(self) -> &'static str {
        match self {
            Decider::Always => "always",
            Decider::Palindrome => "palindrome",
            Decider::Equal01 => "equal01",
        }
    }

    /// Reference predicate on an explicit word.
    pub fn accepts(self, word: &[bool]) -> bool {
        match self {
            Decider::Always => true,
            Decider::Palindrome => word.iter().eq(word.iter().rev()),
            Decider::Equal01 => word.iter().filter(|&&b| b).count() * 2 == word.len(),
        }
    }

    /// Program-side decision on `w_i`, read from the low `len` bits of `i`,
    /// charged by the word length.
    fn decide(self, vm: &mut Vm, i: &BigUint, len: u64) -> Step<bool> {
        match self {
            Decider::Always => {
                vm.tick()?;
                Ok(true)
            }
            Decider::Palindrome => {
                // reverse the word, then compare
                vm.read_mem(len)?;
                let word = i & ((BigUint::from(1u32) << len) - 1u32);
                let rev = (0..len).fold(BigUint::zero(), |acc, j| (acc << 1) | BigUint::from(word.bit(j) as u32));
                vm.write_mem(len)?;
                Ok(vm.cmp(&word, &rev)?.is_eq())
            }
            Decider::Equal01 => {
                vm.read_mem(len)?;
                let ones = (0..len).filter(|&j| i.bit(j)).count() as u64;
                Ok(vm.cmp(&n(2 * ones), &n(len))?.is_eq())
            }
        }
    }
}

impl fmt::Display for Decider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Decider {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Decider::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| format!("unknown decider `{s}`"))
    }
}

/// The first `count` words in length-lexicographic order.
pub fn words(count: u64) -> Vec<Vec<bool>> {
    let mut out = Vec::with_capacity(count as usize);
    let mut len = 0usize;
    'outer: loop {
        let mut w = vec![false; len];
        loop {
            if out.len() as u64 == count {
                break 'outer;
            }
            out.push(w.clone());
            // lexicographic successor within the length, or next length
            match w.iter().rposition(|&b| !b) {
                Some(p) => {
                    w[p] = true;
                    w[p + 1..].iter_mut().for_each(|b| *b = false);
                }
                None => break,
            }
        }
        len += 1;
    }
    out
}

pub fn oracle_langcount(decider: Decider, n_val: u64) -> u64 {
    words(n_val).iter().filter(|w| decider.accepts(w)).count() as u64
}

fn walk(vm: &mut Vm, n_val: u64, decider: Decider, mut record: impl FnMut(&mut Vm, &BigUint) -> Step) -> Step<BigUint> {
    let mut count = BigUint::zero();
    let mut i = n(1);
    for _ in 1..=n_val {
        let len = i.bits() - 1;
        if decider.decide(vm, &i, len)? {
            count = succ(vm, &count)?;
        }
        record(vm, &count)?;
        i = succ(vm, &i)?;
    }
    Ok(count)
}

pub fn entry(decider: Decider) -> ZooEntry {
    let function = format!("langcount.{decider}");
    let direct = ProgramHandle::costvm(CostedProgram::new(format!("{function}.direct"), function.clone(), 1, move |vm| {
        let n_val = arg_u64(vm, 0)?;
        let c = walk(vm, n_val, decider, |_, _| Ok(()))?;
        vm.emit_record(&c)
    }));
    let enumerator =
        ProgramHandle::costvm(CostedProgram::new(format!("{function}.enumerator"), function.clone(), 1, move |vm| {
            let n_val = arg_u64(vm, 0)?;
            walk(vm, n_val, decider, |vm, c| vm.emit_record(c))?;
            Ok(())
        }));
    let restart = restart_enumerator(&direct).expect("costed programs restart");
    let oracle = Oracle::new(function.clone(), move |k| n(oracle_langcount(decider, k)));
    let mut e = ZooEntry::new(&function, oracle, "log", 1024, "count of accepted words among w_1..w_n")
        .with(Role::Direct, "direct", direct)
        .with(Role::Enumerator, "enumerator", enumerator)
        .with(Role::Enumerator, "restart", restart);
    if decider == Decider::Palindrome {
        e = e.with(Role::Enumerator, "tm", ProgramHandle::tm("tm/palcount", function, machines::palcount()));
    }
    e
}

pub fn entries() -> Vec<ZooEntry> {
    Decider::ALL.into_iter().map(entry).collect()
}
