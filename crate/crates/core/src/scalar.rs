//! Scalar abstractions.
//!
//! Probability calculations over the discrete market are written once against
//! [`Scalar`], which both `f64` and the exact [`Rational`](crate::Rational)
//! satisfy. The continuum solvers need transcendental functions and are
//! written against [`Real`] (`f32` or `f64`).

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// A field element usable for probability arithmetic: floats or exact rationals.
pub trait Scalar:
    Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Lossy conversion used for tolerance checks and reporting.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion of a count.
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

/// Floating-point scalar for the ODE, quadrature and root-finding code.
pub trait Real: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Converts an `f64` literal, panicking only for unrepresentable values.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn half<S: Scalar>() -> S {
        S::one() / S::from_count(2)
    }

    #[test]
    fn same_code_path_for_float_and_rational() {
        assert_eq!(half::<f64>(), 0.5);
        assert_eq!(half::<Rational>().as_f64(), 0.5);
        assert_eq!(f32::lit(0.25), 0.25f32);
    }
}
