//! Scalar abstraction for the probability arithmetic.
//!
//! All decoder-side probability computations are written against [`Real`] so
//! the same code runs in `f32` or `f64`. The harness and the bundled tests
//! instantiate everything at `f64` (see the aliases at the crate root);
//! `f32` is available for memory-constrained experimentation.

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar used for log-probabilities and probabilities.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; panics only if the value is not
    /// representable at all (never for finite probabilities).
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 not representable in this scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// log(exp(a) + exp(b)) without leaving the log domain.
pub fn log_add<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log-sum-exp over a slice; returns -inf for an empty slice.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let hi = xs
        .iter()
        .cloned()
        .fold(T::neg_infinity(), |m, x| if x > m { x } else { m });
    if hi == T::neg_infinity() {
        return hi;
    }
    let sum = xs
        .iter()
        .map(|&x| (x - hi).exp())
        .fold(T::zero(), |acc, v| acc + v);
    hi + sum.ln()
}
