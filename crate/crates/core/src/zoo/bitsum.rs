//! `bitsum3(n)`: parity of `Σ_{k=1}^{n} bit_k(3^k)`.
//!
//! `bit_k` counts from the least significant bit starting at 1, so the
//! summand is bit `k-1` of `3^k`. The `bitsum3_msb` variant counts from the
//! most significant bit instead.

use num_bigint::BigUint;
use num_traits::One;

use super::{arg_u64, n, succ, Role, ZooEntry};
use crate::combinators::{restart_enumerator, ProgramHandle};
use crate::costvm::{CostedProgram, Step, Vm};
use crate::etm::Oracle;
use crate::natural::bit_len;

/// Which bit of `3^k` the `k`-th summand takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitOrder {
    FromLsb,
    FromMsb,
}

impl BitOrder {
    fn function(self) -> &'static str {
        match self {
            BitOrder::FromLsb => "bitsum3",
            BitOrder::FromMsb => "bitsum3_msb",
        }
    }
}

/// Little-endian bit vector of `3^k`, built by repeated `x + 2x` with an
/// explicit carry. Shares no arithmetic with the programs.
pub fn powers_of_three_bits(k_max: u64) -> Vec<Vec<bool>> {
    let mut x = vec![true];
    let mut out = Vec::with_capacity(k_max as usize);
    for _ in 1..=k_max {
        let mut next = Vec::with_capacity(x.len() + 2);
        let mut carry = 0u8;
        for j in 0..x.len() + 2 {
            let a = x.get(j).copied().unwrap_or(false) as u8;
            let b = j.checked_sub(1).and_then(|p| x.get(p)).copied().unwrap_or(false) as u8;
            let s = a + b + carry;
            next.push(s & 1 == 1);
            carry = s >> 1;
        }
        while next.last() == Some(&false) {
            next.pop();
        }
        x = next;
        out.push(x.clone());
    }
    out
}

/// Brute-force oracle over explicit bit vectors.
pub fn oracle_bitsum3(n_val: u64, order: BitOrder) -> u64 {
    let powers = powers_of_three_bits(n_val);
    let mut sum = 0u64;
    for (k, bits) in (1..=n_val).zip(&powers) {
        let idx = match order {
            BitOrder::FromLsb => k as usize - 1,
            BitOrder::FromMsb => bits.len() - k as usize,
        };
        sum += bits.get(idx).copied().unwrap_or(false) as u64;
    }
    sum % 2
}

/// Walks `k = 1..=n`, keeping `3^k` and the running parity; `record` is
/// called with the parity after each `k`.
fn walk(vm: &mut Vm, n_val: u64, order: BitOrder, mut record: impl FnMut(&mut Vm, u64) -> Step) -> Step<u64> {
    let three = n(3);
    let mut p = BigUint::one();
    let mut parity = 0u64;
    let mut k = n(1);
    for kk in 1..=n_val {
        p = vm.mul(&p, &three)?;
        let idx = match order {
            BitOrder::FromLsb => kk - 1,
            BitOrder::FromMsb => bit_len(&p) - kk,
        };
        if vm.bit(&p, idx)? {
            vm.tick()?;
            parity ^= 1;
        }
        record(vm, parity)?;
        k = succ(vm, &k)?;
    }
    Ok(parity)
}

fn entry(order: BitOrder, notes: &'static str) -> ZooEntry {
    let function = order.function();
    let direct = ProgramHandle::costvm(CostedProgram::new(format!("{function}.direct"), function, 1, move |vm| {
        let n_val = arg_u64(vm, 0)?;
        let parity = walk(vm, n_val, order, |_, _| Ok(()))?;
        vm.emit_record(&n(parity))
    }));
    let enumerator =
        ProgramHandle::costvm(CostedProgram::new(format!("{function}.enumerator"), function, 1, move |vm| {
            let n_val = arg_u64(vm, 0)?;
            walk(vm, n_val, order, |vm, parity| vm.emit_record(&n(parity)))?;
            Ok(())
        }));
    let restart = restart_enumerator(&direct).expect("costed programs restart");
    ZooEntry::new(function, Oracle::new(function, move |k| n(oracle_bitsum3(k, order))), "1", 64, notes)
        .with(Role::Direct, "direct", direct)
        .with(Role::Enumerator, "enumerator", enumerator)
        .with(Role::Enumerator, "restart", restart)
}

pub fn bitsum3() -> ZooEntry {
    entry(BitOrder::FromLsb, "parity of Σ bit_k(3^k), bits from the least significant, starting at 1")
}

pub fn bitsum3_msb() -> ZooEntry {
    entry(BitOrder::FromMsb, "as bitsum3 with bits counted from the most significant")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        // 3 = 11, 9 = 1001, 27 = 11011: bit_1(3) = 1, bit_2(9) = 0, bit_3(27) = 0
        assert_eq!((1..=3).map(|k| oracle_bitsum3(k, BitOrder::FromLsb)).collect::<Vec<_>>(), vec![1, 1, 1]);
        // from the top: 3 → 1, 9 → 0, 27 → 0
        assert_eq!(oracle_bitsum3(3, BitOrder::FromMsb), 1);
    }

    #[test]
    fn bit_vectors_match_powers() {
        for (k, bits) in (1..=40u32).zip(powers_of_three_bits(40)) {
            let v = bits.iter().rev().fold(BigUint::from(0u32), |acc, &b| (acc << 1) + BigUint::from(b as u32));
            assert_eq!(v, BigUint::from(3u32).pow(k));
        }
    }
}
