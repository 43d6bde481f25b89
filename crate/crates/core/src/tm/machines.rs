//! Hand-built machines shipped with the library.
//!
//! Each builder returns a validated [`MachineSpec`]; the same machines are
//! shipped as machine files under `machines/` and tests keep the two in sync.

use super::{MachineBuilder, MachineSpec};

fn finish(b: &MachineBuilder) -> MachineSpec {
    b.build().unwrap_or_else(|e| panic!("built-in machine is malformed: {e}"))
}

/// Emits `#1` on every input and halts.
pub fn emit1() -> MachineSpec {
    let mut b = MachineBuilder::new("emit1", 1);
    b.start("q0").halt("done");
    b.rule("q0", "**", "q1", "=", "SS", '#');
    b.rule("q1", "**", "done", "=", "SS", '1');
    finish(&b)
}

/// Copies the input to the output as one record, then returns the input head
/// to the first cell.
pub fn identity() -> MachineSpec {
    let mut b = MachineBuilder::new("identity", 1);
    b.start("open").halt("done");
    b.rule("open", "**", "copy", "=", "SS", '#');
    b.rule("copy", "0*", "copy", "=", "RS", '0');
    b.rule("copy", "1*", "copy", "=", "RS", '1');
    b.rule("copy", "_*", "rewind", "=", "LS", '-');
    b.rule("rewind", "b*", "rewind", "=", "LS", '-');
    b.rule("rewind", "_*", "done", "=", "RS", '-');
    finish(&b)
}

/// Emits `#(n+1)`. Leaves the work tape blank and the input head on the first
/// cell, so it can be restarted by [`super::glue::restart`].
pub fn increment() -> MachineSpec {
    let mut b = MachineBuilder::new("increment", 1);
    b.start("copy").halt("done");
    b.rule("copy", "0*", "copy", "0", "RR", '-');
    b.rule("copy", "1*", "copy", "1", "RR", '-');
    b.rule("copy", "_*", "carry", "=", "SL", '-');
    b.rule("carry", "*1", "carry", "0", "SL", '-');
    b.rule("carry", "*0", "wrew", "1", "SL", '-');
    b.rule("carry", "*_", "wrew", "1", "SL", '-');
    b.rule("wrew", "*b", "wrew", "=", "SL", '-');
    b.rule("wrew", "*_", "istart", "=", "SR", '-');
    b.rule("istart", "**", "irew", "=", "LS", '-');
    b.rule("irew", "b*", "irew", "=", "LS", '-');
    b.rule("irew", "_*", "hash", "=", "RS", '-');
    b.rule("hash", "**", "emit", "=", "SS", '#');
    b.rule("emit", "*0", "emit", "_", "SR", '0');
    b.rule("emit", "*1", "emit", "_", "SR", '1');
    b.rule("emit", "*_", "done", "=", "SS", '-');
    finish(&b)
}

fn accept_reject(b: &mut MachineBuilder, pattern: &str, keep: &str, stay: &str) {
    b.rule("acc", pattern, "acc1", keep, stay, '#');
    b.rule("acc1", pattern, "accept", keep, stay, '1');
    b.rule("rej", pattern, "rej1", keep, stay, '#');
    b.rule("rej1", pattern, "reject", keep, stay, '0');
}

/// Palindrome decider that works with a single head: it copies the input to
/// the work tape once and then repeatedly erases matching end symbols,
/// walking the whole remaining word each time. Quadratic in the length.
/// Emits `#1` and halts in `accept`, or `#0` and halts in `reject`.
pub fn palindrome1() -> MachineSpec {
    let mut b = MachineBuilder::new("palindrome1", 1);
    b.start("copy").halt("accept").halt("reject");
    b.rule("copy", "0*", "copy", "0", "RR", '-');
    b.rule("copy", "1*", "copy", "1", "RR", '-');
    b.rule("copy", "_*", "wback", "=", "SL", '-');
    b.rule("wback", "*b", "wback", "=", "SL", '-');
    b.rule("wback", "*_", "left", "=", "SR", '-');
    b.rule("left", "*_", "acc", "=", "SS", '-');
    b.rule("left", "*0", "seek0", "_", "SR", '-');
    b.rule("left", "*1", "seek1", "_", "SR", '-');
    for c in ['0', '1'] {
        let other = if c == '0' { '1' } else { '0' };
        b.rule(&format!("seek{c}"), "*b", &format!("seek{c}"), "=", "SR", '-');
        b.rule(&format!("seek{c}"), "*_", &format!("check{c}"), "=", "SL", '-');
        b.rule(&format!("check{c}"), "*_", "acc", "=", "SS", '-');
        b.rule(&format!("check{c}"), &format!("*{c}"), "back", "_", "SL", '-');
        b.rule(&format!("check{c}"), &format!("*{other}"), "rej", "=", "SS", '-');
    }
    b.rule("back", "*b", "back", "=", "SL", '-');
    b.rule("back", "*_", "left", "=", "SR", '-');
    accept_reject(&mut b, "**", "=", "SS");
    finish(&b)
}

/// Palindrome decider using the input head and a work head together: copy,
/// rewind the input, then compare forwards against backwards. Linear.
pub fn palindrome2() -> MachineSpec {
    let mut b = MachineBuilder::new("palindrome2", 1);
    b.start("copy").halt("accept").halt("reject");
    b.rule("copy", "0*", "copy", "0", "RR", '-');
    b.rule("copy", "1*", "copy", "1", "RR", '-');
    b.rule("copy", "_*", "rewind", "=", "LL", '-');
    b.rule("rewind", "b*", "rewind", "=", "LS", '-');
    b.rule("rewind", "_*", "cmp", "=", "RS", '-');
    b.rule("cmp", "00", "cmp", "=", "RL", '-');
    b.rule("cmp", "11", "cmp", "=", "RL", '-');
    b.rule("cmp", "01", "rej", "=", "SS", '-');
    b.rule("cmp", "10", "rej", "=", "SS", '-');
    b.rule("cmp", "__", "acc", "=", "SS", '-');
    accept_reject(&mut b, "**", "=", "SS");
    finish(&b)
}

/// Enumerator for the number of palindromes among the first `i` words of
/// `{0,1}*` in length-then-lexicographic order, for `i = 1..=n`.
///
/// Tapes: 1 holds the counter `i`, 2 the word `w_i` (binary `i` without its
/// leading one), 3 the running count.
pub fn palcount() -> MachineSpec {
    let mut b = MachineBuilder::new("palcount", 3);
    b.start("init").halt("done");
    b.rule("init", "****", "skip", "1=0", "SSSS", '-');

    // w_i = i without its leading bit
    b.rule("skip", "*b**", "cp", "===", "SRSS", '-');
    b.rule("cp", "*0**", "cp", "=0=", "SRRS", '-');
    b.rule("cp", "*1**", "cp", "=1=", "SRRS", '-');
    b.rule("cp", "*_**", "rwi", "===", "SLLS", '-');
    b.rule("rwi", "*b**", "rwi", "===", "SLSS", '-');
    b.rule("rwi", "*_**", "rww", "===", "SRSS", '-');
    b.rule("rww", "**b*", "rww", "===", "SSLS", '-');
    b.rule("rww", "**_*", "zl", "===", "SSRS", '-');

    // single-head palindrome test on tape 2, erasing it
    b.rule("zl", "**_*", "pal", "===", "SSSS", '-');
    b.rule("zl", "**0*", "zs0", "=_=", "SSRS", '-');
    b.rule("zl", "**1*", "zs1", "=_=", "SSRS", '-');
    for c in ['0', '1'] {
        let other = if c == '0' { '1' } else { '0' };
        b.rule(&format!("zs{c}"), "**b*", &format!("zs{c}"), "===", "SSRS", '-');
        b.rule(&format!("zs{c}"), "**_*", &format!("zc{c}"), "===", "SSLS", '-');
        b.rule(&format!("zc{c}"), "**_*", "pal", "===", "SSSS", '-');
        b.rule(&format!("zc{c}"), &format!("**{c}*"), "zb", "=_=", "SSLS", '-');
        b.rule(&format!("zc{c}"), &format!("**{other}*"), "zerase", "=_=", "SSLS", '-');
    }
    b.rule("zb", "**b*", "zb", "===", "SSLS", '-');
    b.rule("zb", "**_*", "zl", "===", "SSRS", '-');
    b.rule("zerase", "**b*", "zerase", "=_=", "SSLS", '-');
    b.rule("zerase", "**_*", "hash", "===", "SSSS", '-');

    // count += 1
    b.rule("pal", "***b", "pal", "===", "SSSR", '-');
    b.rule("pal", "***_", "kc", "===", "SSSL", '-');
    b.rule("kc", "***1", "kc", "==0", "SSSL", '-');
    b.rule("kc", "***0", "kr", "==1", "SSSL", '-');
    b.rule("kc", "***_", "kr", "==1", "SSSL", '-');
    b.rule("kr", "***b", "kr", "===", "SSSL", '-');
    b.rule("kr", "***_", "hash", "===", "SSSR", '-');

    // emit #count
    b.rule("hash", "****", "ek", "===", "SSSS", '#');
    b.rule("ek", "***0", "ek", "===", "SSSR", '0');
    b.rule("ek", "***1", "ek", "===", "SSSR", '1');
    b.rule("ek", "***_", "ekr", "===", "SSSL", '-');
    b.rule("ekr", "***b", "ekr", "===", "SSSL", '-');
    b.rule("ekr", "***_", "cmp", "===", "SSSR", '-');

    // stop when i = n; both are canonical and start with 1
    b.rule("cmp", "00**", "cmp", "===", "RRSS", '-');
    b.rule("cmp", "11**", "cmp", "===", "RRSS", '-');
    b.rule("cmp", "__**", "done", "===", "SSSS", '-');
    b.fallback("cmp", "****", "neq", "===", "LLSS", '-');
    b.rule("neq", "b***", "neq", "===", "LSSS", '-');
    b.rule("neq", "_***", "rwc", "===", "RSSS", '-');
    b.rule("rwc", "*b**", "rwc", "===", "SLSS", '-');
    b.rule("rwc", "*_**", "inc", "===", "SRSS", '-');

    // i += 1
    b.rule("inc", "*b**", "inc", "===", "SRSS", '-');
    b.rule("inc", "*_**", "ic", "===", "SLSS", '-');
    b.rule("ic", "*1**", "ic", "0==", "SLSS", '-');
    b.rule("ic", "*0**", "ir", "1==", "SLSS", '-');
    b.rule("ic", "*_**", "ir", "1==", "SLSS", '-');
    b.rule("ir", "*b**", "ir", "===", "SLSS", '-');
    b.rule("ir", "*_**", "skip", "===", "SRSS", '-');
    finish(&b)
}

/// Every built-in machine, by name.
pub fn all() -> Vec<MachineSpec> {
    vec![emit1(), identity(), increment(), palindrome1(), palindrome2(), palcount()]
}
