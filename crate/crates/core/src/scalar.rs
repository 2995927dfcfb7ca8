use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point element type accepted by the rank, survival and screening
/// routines. Implemented for `f32` and `f64`.
///
/// Rank-weighted sums are accumulated in `Self`, so they are exact only while
/// the integer magnitudes fit in the mantissa (`n³ < 2^53` for `f64`,
/// `n³ < 2^24` for `f32`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    #[inline]
    fn half() -> Self {
        Self::from_f64(0.5).unwrap()
    }

    #[inline]
    fn quarter() -> Self {
        Self::from_f64(0.25).unwrap()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
