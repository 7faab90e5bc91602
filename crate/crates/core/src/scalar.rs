use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distributions::uniform::SampleUniform;

/// Real scalar the numeric core is written against.
///
/// Implemented for `f32` and `f64`. The `Display`/`FromStr` pair must
/// round-trip, which the tree serialization relies on.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Literal conversion; panics only for values the type cannot represent at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Maps NaN to +inf, leaving every other value alone. Losses use this so
    /// that ordering comparisons stay total.
    fn nan_to_inf(self) -> Self {
        if self.is_nan() {
            Self::infinity()
        } else {
            self
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
