//! Scalar abstraction for the measure math.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the divergence and summary code is generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent finite f64 values.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Ordered field used where results must be exact, e.g. group means over
/// rational scores. Implemented by the float types and `num_rational::Ratio`.
pub trait Field: num_traits::Num + num_traits::Signed + num_traits::FromPrimitive + Clone + PartialOrd + Debug {}

impl<T> Field for T where T: num_traits::Num + num_traits::Signed + num_traits::FromPrimitive + Clone + PartialOrd + Debug {}
