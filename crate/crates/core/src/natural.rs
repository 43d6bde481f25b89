//! Binary encoding of naturals, shared by tape inputs and output records.
//!
//! Naturals are written most-significant bit first with no leading zeros;
//! zero is the single bit `0`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::tm::Symbol;

/// Bit length used by the cost model: `0` still occupies one cell.
pub fn bit_len(value: &BigUint) -> u64 {
    value.bits().max(1)
}

/// Bits of `value`, MSB first.
pub fn encode_bits(value: &BigUint) -> Vec<bool> {
    if value.is_zero() {
        return vec![false];
    }
    let len = value.bits();
    (0..len).rev().map(|k| value.bit(k)).collect()
}

/// Inverse of [`encode_bits`]. Leading zeros are tolerated; callers that need
/// the canonical form should compare against `encode_bits` instead.
pub fn decode_bits(bits: &[bool]) -> BigUint {
    let mut out = BigUint::zero();
    for &b in bits {
        out <<= 1u8;
        if b {
            out += BigUint::one();
        }
    }
    out
}

pub fn encode_symbols(value: &BigUint) -> Vec<Symbol> {
    encode_bits(value).into_iter().map(Symbol::from_bit).collect()
}

/// Tape-0 layout for a tuple of naturals: the encodings joined by `#`.
pub fn encode_args(args: &[BigUint]) -> Vec<Symbol> {
    let mut out = Vec::new();
    for (idx, arg) in args.iter().enumerate() {
        if idx > 0 {
            out.push(Symbol::Hash);
        }
        out.extend(encode_symbols(arg));
    }
    out
}

/// True if `bits` is the canonical encoding of some natural.
pub fn is_canonical(bits: &[bool]) -> bool {
    match bits {
        [] => false,
        [_] => true,
        [first, ..] => *first,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_single_bit() {
        assert_eq!(encode_bits(&BigUint::zero()), vec![false]);
        assert_eq!(bit_len(&BigUint::zero()), 1);
    }

    #[test]
    fn msb_first() {
        assert_eq!(encode_bits(&BigUint::from(6u32)), vec![true, true, false]);
        assert_eq!(decode_bits(&[true, false, false, true]), BigUint::from(9u32));
    }

    #[test]
    fn canonical_forms() {
        assert!(is_canonical(&[false]));
        assert!(is_canonical(&[true, false]));
        assert!(!is_canonical(&[false, true]));
        assert!(!is_canonical(&[]));
    }

    #[test]
    fn args_are_hash_separated() {
        let args = [BigUint::from(2u32), BigUint::from(1u32)];
        let syms: String = encode_args(&args).iter().map(|s| s.to_char()).collect();
        assert_eq!(syms, "10#1");
    }
}
