//! Numeric scalars for the analysis layer.
//!
//! Analysis routines that only need field arithmetic are generic over
//! [`Scalar`], so they run on `f64`, `f32`, or exact rationals. Logarithms are
//! optional: exact types return `None`, and callers that need them report it.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Clone + PartialOrd + Debug + Num + FromPrimitive + ToPrimitive + Send + Sync {
    /// Base-2 logarithm, if the type can represent it.
    fn log2_opt(&self) -> Option<Self>;

    fn from_u64_exact(v: u64) -> Self {
        Self::from_u64(v).expect("every scalar type represents u64 values")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn log2_opt(&self) -> Option<Self> {
        Some(self.log2())
    }
}

impl Scalar for f32 {
    fn log2_opt(&self) -> Option<Self> {
        Some(self.log2())
    }
}

impl Scalar for BigRational {
    fn log2_opt(&self) -> Option<Self> {
        None
    }

    fn from_u64_exact(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}
