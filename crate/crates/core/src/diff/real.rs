//! Scalar abstraction shared by plain `f64` evaluation and the gradient tape.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant carrying no derivative information.
    fn from_f64(x: f64) -> Self;
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    /// Square root; the derivative at exactly zero is taken as zero.
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// `1 - self`, spelled out because `f64 - R` is not available generically.
    fn one_minus(self) -> Self {
        -self + 1.0
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

pub fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter()
        .zip(b)
        .fold(R::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn sum<R: Real>(xs: impl IntoIterator<Item = R>) -> R {
    xs.into_iter().fold(R::zero(), |acc, x| acc + x)
}

/// Numerically stable `ln(sum_i exp(x_i))`.
pub fn log_sum_exp<R: Real>(xs: &[R]) -> R {
    let max = xs
        .iter()
        .map(|x| x.value())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return R::from_f64(max);
    }
    sum(xs.iter().map(|&x| (x - max).exp())).ln() + max
}

/// Softmax with the maximum subtracted first.
pub fn softmax<R: Real>(logits: &[R]) -> Vec<R> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|&x| (x - lse).exp()).collect()
}

/// Mean negative log-probability of `target` under `softmax(logits)`.
pub fn cross_entropy<R: Real>(logits: &[R], target: usize) -> R {
    log_sum_exp(logits) - logits[target]
}
