//! Step-exact laboratory for enumerating machines, approximations and
//! computational analogy witnesses.
//!
//! Two execution backends share one trace model: a multi-tape Turing machine
//! interpreter ([`tm`]) and a cost-model VM ([`costvm`]) that charges host
//! programs by operand bit length. Time always means charged steps.

pub mod analogy;
pub mod analysis;
pub mod approx;
pub mod bound;
pub mod combinators;
pub mod costvm;
pub mod etm;
pub mod natural;
pub mod scalar;
pub mod tm;
pub mod zoo;

pub use scalar::Scalar;

/// Arbitrary-precision naturals used for all inputs and record values.
pub type Natural = num_bigint::BigUint;
pub type FitReport = analysis::FitReport<f64>;
pub type ThetaComparison = analysis::ThetaComparison<f64>;
pub type ExactThetaComparison = analysis::ThetaComparison<num_rational::BigRational>;
pub type AppendixBReport = analysis::AppendixBReport<f64>;
pub type ExactAppendixBReport = analysis::AppendixBReport<num_rational::BigRational>;
