//! Step bounds drawn from a fixed whitelist of closed forms.
//!
//! A [`Bound`] is a sum `c₁·g₁(n) + c₂·g₂(n) + ...` where each `gⱼ` is one of
//! `1`, `log n`, `n`, `n log n`, `n²`. Witness checks evaluate it on integers
//! with `log n` read as the bit length of `n` (so `log 1 = 1`), which is the
//! number of cells `n` occupies. [`Bound::eval_scalar`] uses the real `log₂`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundForm {
    Const,
    Log,
    Linear,
    NLogN,
    Square,
}

impl BoundForm {
    pub const ALL: [BoundForm; 5] =
        [BoundForm::Const, BoundForm::Log, BoundForm::Linear, BoundForm::NLogN, BoundForm::Square];

    pub fn token(self) -> &'static str {
        match self {
            BoundForm::Const => "1",
            BoundForm::Log => "log",
            BoundForm::Linear => "n",
            BoundForm::NLogN => "nlogn",
            BoundForm::Square => "n^2",
        }
    }

    fn from_token(t: &str) -> Option<BoundForm> {
        Some(match t {
            "1" | "const" => BoundForm::Const,
            "log" | "logn" | "log n" => BoundForm::Log,
            "n" => BoundForm::Linear,
            "nlogn" | "n log n" | "n*log" | "n*logn" => BoundForm::NLogN,
            "n^2" | "n2" | "n*n" => BoundForm::Square,
            _ => return None,
        })
    }

    /// Integer value with `log n` = bit length of `n`.
    pub fn eval(self, n: u64) -> u64 {
        let log = 64 - n.max(1).leading_zeros() as u64;
        match self {
            BoundForm::Const => 1,
            BoundForm::Log => log,
            BoundForm::Linear => n,
            BoundForm::NLogN => n.saturating_mul(log),
            BoundForm::Square => n.saturating_mul(n),
        }
    }

    /// Real value with `log n = log₂ n`; `None` if `S` has no logarithm and
    /// the form needs one.
    pub fn eval_scalar<S: Scalar>(self, x: &S) -> Option<S> {
        Some(match self {
            BoundForm::Const => S::one(),
            BoundForm::Log => x.log2_opt()?,
            BoundForm::Linear => x.clone(),
            BoundForm::NLogN => x.clone() * x.log2_opt()?,
            BoundForm::Square => x.clone() * x.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundTerm {
    pub coeff: u64,
    pub form: BoundForm,
}

/// A whitelisted bound function. Every form is nondecreasing, and so is any
/// sum with nonnegative coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bound {
    terms: Vec<BoundTerm>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad bound `{text}`: {reason}")]
pub struct BoundParseError {
    pub text: String,
    pub reason: String,
}

impl Bound {
    pub fn new(terms: impl IntoIterator<Item = (u64, BoundForm)>) -> Bound {
        let mut b = Bound { terms: Vec::new() };
        for (coeff, form) in terms {
            b.push(coeff, form);
        }
        b
    }

    pub fn term(coeff: u64, form: BoundForm) -> Bound {
        Bound::new([(coeff, form)])
    }

    pub fn constant(c: u64) -> Bound {
        Bound::term(c, BoundForm::Const)
    }

    fn push(&mut self, coeff: u64, form: BoundForm) {
        if coeff == 0 {
            return;
        }
        match self.terms.iter_mut().find(|t| t.form == form) {
            Some(t) => t.coeff += coeff,
            None => {
                self.terms.push(BoundTerm { coeff, form });
                self.terms.sort_by_key(|t| std::cmp::Reverse(t.form));
            }
        }
    }

    pub fn terms(&self) -> &[BoundTerm] {
        &self.terms
    }

    pub fn plus(&self, other: &Bound) -> Bound {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.coeff, t.form);
        }
        out
    }

    pub fn scaled(&self, k: u64) -> Bound {
        Bound::new(self.terms.iter().map(|t| (t.coeff * k, t.form)))
    }

    pub fn eval(&self, n: u64) -> u64 {
        self.terms.iter().map(|t| t.coeff.saturating_mul(t.form.eval(n))).fold(0, u64::saturating_add)
    }

    pub fn eval_scalar<S: Scalar>(&self, x: &S) -> Option<S> {
        let mut acc = S::zero();
        for t in &self.terms {
            acc = acc + S::from_u64_exact(t.coeff) * t.form.eval_scalar(x)?;
        }
        Some(acc)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, t) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            match (t.coeff, t.form) {
                (c, BoundForm::Const) => write!(f, "{c}")?,
                (1, form) => write!(f, "{}", form.token())?,
                (c, form) => write!(f, "{c}*{}", form.token())?,
            }
        }
        Ok(())
    }
}

impl FromStr for Bound {
    type Err = BoundParseError;

    /// Parses sums such as `3*nlogn + 2*log + 5`.
    fn from_str(text: &str) -> Result<Bound, BoundParseError> {
        let err = |reason: &str| BoundParseError { text: text.to_string(), reason: reason.to_string() };
        let mut out = Bound { terms: Vec::new() };
        if text.trim().is_empty() {
            return Err(err("empty"));
        }
        for part in text.split('+') {
            let part = part.trim();
            let (coeff, form) = match part.split_once('*') {
                Some((c, rest)) if c.trim().chars().all(|ch| ch.is_ascii_digit()) => {
                    let c: u64 = c.trim().parse().map_err(|_| err("bad coefficient"))?;
                    let form = BoundForm::from_token(rest.trim()).ok_or_else(|| err("unknown form"))?;
                    (c, form)
                }
                _ => match part.parse::<u64>() {
                    Ok(c) => (c, BoundForm::Const),
                    Err(_) => (1, BoundForm::from_token(part).ok_or_else(|| err("unknown form"))?),
                },
            };
            out.push(coeff, form);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let b: Bound = "3*nlogn + 2*log + 5".parse().unwrap();
        assert_eq!(b.to_string(), "3*nlogn + 2*log + 5");
        assert_eq!("n^2".parse::<Bound>().unwrap(), Bound::term(1, BoundForm::Square));
        assert!("2*exp".parse::<Bound>().is_err());
        assert!("".parse::<Bound>().is_err());
    }

    #[test]
    fn integer_log_is_bit_length() {
        assert_eq!(BoundForm::Log.eval(1), 1);
        assert_eq!(BoundForm::Log.eval(8), 4);
        assert_eq!(BoundForm::NLogN.eval(8), 32);
        let b: Bound = "2*log + 1".parse().unwrap();
        assert_eq!(b.eval(255), 17);
    }

    #[test]
    fn sums_merge_like_terms() {
        let a: Bound = "nlogn + 1".parse().unwrap();
        let b: Bound = "2*nlogn + 3".parse().unwrap();
        assert_eq!(a.plus(&b).to_string(), "3*nlogn + 4");
        assert_eq!(a.scaled(2).to_string(), "2*nlogn + 2");
    }

    #[test]
    fn scalar_eval_needs_log() {
        use num_rational::BigRational;
        let x = BigRational::from_integer(4.into());
        assert!(Bound::term(1, BoundForm::Log).eval_scalar(&x).is_none());
        assert_eq!(Bound::term(1, BoundForm::Square).eval_scalar(&x), Some(BigRational::from_integer(16.into())));
        assert_eq!(Bound::term(1, BoundForm::NLogN).eval_scalar(&8.0f64), Some(24.0));
    }
}
