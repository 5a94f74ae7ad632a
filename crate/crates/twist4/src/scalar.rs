//! Scalar abstraction shared by the exact and numeric halves of the crate.
//!
//! The exact modules (linear algebra, graded algebra, Lie theory) instantiate
//! every structure at [`Rational`]; the heat-kernel module reuses the generic
//! exterior-word machinery at `Complex64`. Nothing else about the two halves
//! is shared: floating point never enters a rank computation.

use num::complex::Complex64;
use num::{BigInt, BigRational};
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar used by every module that proves something.
pub type Rational = BigRational;

/// Field-like scalar: enough arithmetic for Gaussian elimination and
/// Koszul-signed exterior algebra.
///
/// Implementors must satisfy the field axioms exactly ([`Rational`]) or
/// approximately (`f64`, `Complex64`); the exact modules only ever use the
/// exact instantiation.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// Embed a signed integer.
    fn from_integer(n: i64) -> Self;
}

impl Scalar for BigRational {
    fn from_integer(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl Scalar for f64 {
    fn from_integer(n: i64) -> Self {
        n as f64
    }
}

impl Scalar for Complex64 {
    fn from_integer(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
}

/// Shorthand for the exact rational `n/d`.
///
/// Panics if `d == 0`; intended for literals in constructions and tests.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the exact integer `n` as a rational.
pub fn rint(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_shorthand_reduces() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rint(-3), rat(-3, 1));
    }

    #[test]
    fn scalar_embedding_agrees_across_instantiations() {
        assert_eq!(<Rational as Scalar>::from_integer(7), rint(7));
        assert_eq!(<f64 as Scalar>::from_integer(7), 7.0);
        assert_eq!(
            <Complex64 as Scalar>::from_integer(7),
            Complex64::new(7.0, 0.0)
        );
    }
}
