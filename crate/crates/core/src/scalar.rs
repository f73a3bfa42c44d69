//! Scalar abstractions shared by the numeric parts of the crate.
//!
//! Closed-form bounds are written once against [`Scalar`] and evaluated in
//! `f32`, `f64` or exact [`Rational`](crate::Rational) arithmetic. Fitting
//! and angle computations need transcendental functions and use
//! [`FloatScalar`].

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed};

/// An ordered field element: enough for `min`, `max` and affine arithmetic.
pub trait Scalar: Num + Signed + PartialOrd + Clone + Debug {
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half(self) -> Self {
        self / Self::two()
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where T: Num + Signed + PartialOrd + Clone + Debug {}

/// Floating point scalar: `f32` or `f64`.
pub trait FloatScalar: Scalar + Float + FloatConst + FromPrimitive + Copy + Send + Sync {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl FloatScalar for f32 {}
impl FloatScalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn min_max_work_for_floats_and_rationals() {
        assert_eq!(0.25f64.min_of(0.5), 0.25);
        assert_eq!(0.25f32.max_of(0.5), 0.5);
        let a = Rational::new(1, 3);
        let b = Rational::new(1, 2);
        assert_eq!(a.min_of(b), a);
        assert_eq!(a.max_of(b), b);
        assert_eq!(Rational::from_integer(3).half(), Rational::new(3, 2));
    }
}
