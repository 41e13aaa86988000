//! Scalar abstraction shared by every cost and time computation.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type used for costs, times and demands.
///
/// Implemented for `f32` and `f64`. All literals inside the solver go through
/// [`Scalar::c`], so the algorithms are written once for both widths.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy widening used for reports and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Minimum decrease that counts as an improvement during search.
    ///
    /// Guards against classifying pure rounding noise as a successful move.
    fn improvement_eps() -> Self {
        Self::epsilon().sqrt()
    }
}

impl Scalar for f64 {}
impl Scalar for f32 {}
