//! Floating-point scalar bound for soft-decision message passing.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// f32 or f64. All soft-decision code is generic over this trait.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant; exact for f64, rounded for f32.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
