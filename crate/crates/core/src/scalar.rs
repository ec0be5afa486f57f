//! Scalar abstraction: the numeric core is generic over `f32`/`f64`.

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point scalar usable throughout the numeric core.
pub trait Real:
    Float + FromPrimitive + NumCast + std::fmt::Debug + std::fmt::Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for constants.
    #[inline]
    fn c(v: f64) -> Self {
        NumCast::from(v).expect("constant conversion")
    }

    /// Lossy conversion to `f64`, for reporting and serialization.
    #[inline]
    fn to_f64c(self) -> f64 {
        NumCast::from(self).expect("scalar to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
