//! Scalar abstractions shared by the numeric kernels.
//!
//! Grid arithmetic (distances, cumulative costs, differencing) only needs a
//! signed, ordered scalar, so it runs on integers as well as floats; integer
//! runs are exact, which the test oracles rely on. Statistics and model
//! fitting additionally need division and square roots, hence [`Real`].

use num_traits::{Float, FromPrimitive, Signed};

/// A signed, ordered, copyable scalar: `i32`, `i64`, `f32` or `f64`.
pub trait Scalar: Signed + Copy + PartialOrd {
    /// False only for non-finite floats; integer values are always finite.
    fn finite(self) -> bool;

    /// Filler stored in masked (invalid) slots: NaN for floats so that any
    /// accidental use trips downstream finiteness checks, zero for integers.
    fn masked_fill() -> Self;
}

impl Scalar for f64 {
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn masked_fill() -> Self {
        f64::NAN
    }
}

impl Scalar for f32 {
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn masked_fill() -> Self {
        f32::NAN
    }
}

impl Scalar for i64 {
    fn finite(self) -> bool {
        true
    }
    fn masked_fill() -> Self {
        0
    }
}

impl Scalar for i32 {
    fn finite(self) -> bool {
        true
    }
    fn masked_fill() -> Self {
        0
    }
}

/// Floating-point scalar for statistics, scaling and least-squares fitting.
pub trait Real: Scalar + Float + FromPrimitive {
    /// Lossless-enough conversion for counts and accumulator seeds.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f64 {}
impl Real for f32 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finiteness() {
        assert!(1.5f64.finite());
        assert!(!f64::NAN.finite());
        assert!(!f64::INFINITY.finite());
        assert!(7i64.finite());
    }

    #[test]
    fn masked_fill_values() {
        assert!(f64::masked_fill().is_nan());
        assert_eq!(i64::masked_fill(), 0);
    }
}
