//! Arithmetic functions: identity, increment, constant 1, `n!` and its
//! multiples, `3^n`, and the interleave of `n!`.

use num_bigint::BigUint;
use num_traits::One;

use super::{direct, n, step, succ, Registry, Role, ZooEntry};
use crate::approx::{ApproximationWitness, RecordRule};
use crate::combinators::{incremental_enumerator, interleave_trivial, restart_enumerator, ProgramHandle};
use crate::costvm::{CostedProgram, Step, Vm};
use crate::etm::Oracle;
use crate::tm::machines;

fn restart(m: &ProgramHandle) -> ProgramHandle {
    restart_enumerator(m).unwrap_or_else(|e| panic!("built-in program is not restartable: {e}"))
}

/// `∏_{i=2}^{n} i`, one charged multiplication per factor.
fn factorial_value(vm: &mut Vm, n_val: u64) -> Step<BigUint> {
    let mut acc = BigUint::one();
    let mut i = n(2);
    for _ in 2..=n_val {
        acc = vm.mul(&acc, &i)?;
        i = succ(vm, &i)?;
    }
    Ok(acc)
}

fn factorial_oracle(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// `c · n!` for `c = 2^shift`, with direct, step, incremental and restart
/// programs.
fn factorial_multiple(function: &str, shift: u64, value_bits: &str, notes: &'static str) -> ZooEntry {
    let oracle = Oracle::new(function, move |k| factorial_oracle(k) << shift);
    let d = direct(function, move |vm, k| {
        let f = factorial_value(vm, k)?;
        if shift == 0 {
            Ok(f)
        } else {
            vm.shl(&f, shift)
        }
    });
    let s = step(function, |vm, i, prev| vm.mul(prev, i));
    let inc = incremental_enumerator(function, n(1) << shift, &s);
    ZooEntry::new(function, oracle, value_bits, 64, notes)
        .with(Role::Direct, "direct", d.clone())
        .with(Role::Step, "step", s)
        .with(Role::Enumerator, "incremental", inc)
        .with(Role::Enumerator, "restart", restart(&d))
}

fn pow3() -> ZooEntry {
    let oracle = Oracle::new("pow3", |k| BigUint::from(3u32).pow(k as u32));
    let three = n(3);
    let t = three.clone();
    let d = direct("pow3", move |vm, k| {
        let mut acc = BigUint::one();
        let mut i = n(0);
        for _ in 0..k {
            acc = vm.mul(&acc, &t)?;
            i = succ(vm, &i)?;
        }
        Ok(acc)
    });
    let t = three.clone();
    let s = step("pow3", move |vm, _i, prev| vm.mul(prev, &t));
    let inc = incremental_enumerator("pow3", three.clone(), &s);
    // 3^k by squaring along the bits of k, most significant first
    let shortcut = ProgramHandle::costvm(CostedProgram::new("pow3.shortcut", "pow3", 1, move |vm| {
        let k = vm.arg(0)?;
        let mut acc = BigUint::one();
        for b in (0..k.bits()).rev() {
            acc = vm.mul(&acc, &acc)?;
            if vm.bit(&k, b)? {
                acc = vm.mul(&acc, &three)?;
            }
        }
        vm.emit_record(&acc)
    }));
    ZooEntry::new("pow3", oracle, "2*n", 64, "3^n; shortcut by repeated squaring")
        .with(Role::Direct, "direct", d.clone())
        .with(Role::Step, "step", s)
        .with(Role::Enumerator, "incremental", inc)
        .with(Role::Enumerator, "restart", restart(&d))
        .with(Role::Shortcut, "shortcut", shortcut)
}

fn identity() -> ZooEntry {
    let d = direct("id", |_, k| Ok(n(k)));
    let s = step("id", |vm, _i, prev| succ(vm, prev));
    let tm = ProgramHandle::tm("tm/identity", "id", machines::identity());
    ZooEntry::new("id", Oracle::new("id", n), "log", 256, "n ↦ n")
        .with(Role::Direct, "direct", d)
        .with(Role::Direct, "tm", tm.clone())
        .with(Role::Enumerator, "restart.tm", restart(&tm))
        .with(Role::Enumerator, "incremental", incremental_enumerator("id", n(1), &s))
}

fn increment() -> ZooEntry {
    let d = direct("increment", |vm, k| succ(vm, &n(k)));
    let s = step("increment", |vm, _i, prev| succ(vm, prev));
    let tm = ProgramHandle::tm("tm/increment", "increment", machines::increment());
    ZooEntry::new("increment", Oracle::new("increment", |k| n(k + 1)), "log + 1", 256, "binary increment")
        .with(Role::Direct, "direct", d.clone())
        .with(Role::Direct, "tm", tm.clone())
        .with(Role::Enumerator, "restart", restart(&d))
        .with(Role::Enumerator, "restart.tm", restart(&tm))
        .with(Role::Enumerator, "incremental", incremental_enumerator("increment", n(2), &s))
}

fn const1() -> ZooEntry {
    let d = direct("const1", |_, _| Ok(BigUint::one()));
    let s = step("const1", |_, _i, prev| Ok(prev.clone()));
    let tm = ProgramHandle::tm("tm/emit1", "const1", machines::emit1());
    ZooEntry::new("const1", Oracle::new("const1", |_| BigUint::one()), "1", 256, "f(n) = 1; fails f(n) ≥ n")
        .with(Role::Direct, "direct", d.clone())
        .with(Role::Direct, "tm", tm.clone())
        .with(Role::Enumerator, "restart", restart(&d))
        .with(Role::Enumerator, "restart.tm", restart(&tm))
        .with(Role::Enumerator, "incremental", incremental_enumerator("const1", n(1), &s))
}

pub fn entries() -> Vec<ZooEntry> {
    vec![
        identity(),
        increment(),
        const1(),
        factorial_multiple("factorial", 0, "nlogn", "n!; step (i, (i-1)!) ↦ i!"),
        factorial_multiple("factorial2", 1, "nlogn + 1", "2·n!"),
        factorial_multiple("factorial4", 2, "nlogn + 2", "4·n!"),
        pow3(),
    ]
}

/// `g(2i-1) = i!`, `g(2i) = 1`.
pub fn interleave_factorial() -> ZooEntry {
    let e = factorial_multiple("factorial", 0, "nlogn", "");
    let inc = e.program("incremental").expect("factorial has an incremental enumerator");
    let g = interleave_trivial(inc);
    let oracle = Oracle::new("interleave_factorial", |m| if m % 2 == 0 { BigUint::one() } else { factorial_oracle(m.div_ceil(2)) });
    ZooEntry::new("interleave_factorial", oracle, "nlogn", 64, "interleave of n! with 1 on even indices")
        .with(Role::Enumerator, "enumerator", g.enumerator)
        .with(Role::Shortcut, "shortcut", g.shortcut)
}

/// Helper programs used by the shipped witnesses.
///
/// `helper/approx.*` take `(n, i, r)`; `helper/ca.*` take `(n, v)`.
pub fn helpers() -> Vec<ProgramHandle> {
    let approx = |name: &str, halve: bool| {
        ProgramHandle::costvm(CostedProgram::new(format!("helper/approx.{name}"), name, 3, move |vm| {
            let r = vm.arg(2)?;
            let v = if halve { vm.shr(&r, 1)? } else { r };
            vm.emit_record(&v)
        }))
    };
    let ca = |name: &str, op: fn(&mut Vm, BigUint) -> Step<BigUint>| {
        ProgramHandle::costvm(CostedProgram::new(format!("helper/ca.{name}"), name, 2, move |vm| {
            let v = vm.arg(1)?;
            let out = op(vm, v)?;
            vm.emit_record(&out)
        }))
    };
    vec![
        approx("identity", false),
        approx("halve", true),
        ca("identity", |_, v| Ok(v)),
        ca("double", |vm, v| vm.shl(&v, 1)),
        ca("halve", |vm, v| vm.shr(&v, 1)),
    ]
}

/// The shipped approximation witnesses over `n!`.
///
/// The identity helper costs `2w + 1` on a `w`-bit record and the halving
/// helper `3w + 1`; with `w ≤ i·log i` for `i!` (one more bit for `2·i!`) this
/// gives the bounds below.
pub fn witnesses(r: &Registry) -> Vec<ApproximationWitness> {
    let get = |name: &str| r.program(name).unwrap_or_else(|| panic!("registry lacks `{name}`"));
    let w = |name: &str, m: &str, p: &str, bound: &str| ApproximationWitness {
        name: format!("approx/{name}"),
        function: "factorial".into(),
        m: get(m),
        p: get(p),
        bound: bound.parse().expect("well-formed bound"),
        rho: RecordRule::RecordI,
    };
    vec![
        w("factorial.identity", "zoo/factorial.incremental", "helper/approx.identity", "2*nlogn + 1"),
        w("factorial.doubled", "zoo/factorial2.incremental", "helper/approx.halve", "3*nlogn + 4"),
        w("factorial.doubled-tight", "zoo/factorial2.incremental", "helper/approx.halve", "1"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn value(p: &ProgramHandle, k: u64) -> u64 {
        p.evaluate(&[n(k)], 10_000_000).unwrap().0.to_u64().unwrap()
    }

    #[test]
    fn factorial_programs() {
        let e = factorial_multiple("factorial", 0, "nlogn", "");
        assert_eq!(value(e.program("direct").unwrap(), 5), 120);
        let s = e.program("step").unwrap();
        assert_eq!(s.evaluate(&[n(6), n(120)], 1000).unwrap().0, n(720));
    }

    #[test]
    fn pow3_shortcut_is_cheaper() {
        let e = pow3();
        let (v, fast) = e.program("shortcut").unwrap().evaluate(&[n(8)], 100_000).unwrap();
        assert_eq!(v, n(6561));
        let (_, slow) = e.program("incremental").unwrap().evaluate(&[n(8)], 100_000).unwrap();
        assert!(fast < slow, "{fast} vs {slow}");
    }

    #[test]
    fn helper_costs_match_bound_arithmetic() {
        let hs = helpers();
        let id = &hs[0];
        let halve = &hs[1];
        let r = n(720);
        let w = 10;
        assert_eq!(id.evaluate(&[n(6), n(6), r.clone()], 1000).unwrap(), (r.clone(), 2 * w + 1));
        let (v, t) = halve.evaluate(&[n(6), n(6), r << 1], 1000).unwrap();
        assert_eq!((v, t), (n(720), 3 * (w + 1) + 1));
    }
}
