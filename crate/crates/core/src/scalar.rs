//! Scalar abstraction for the numerical core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Real scalar type the radio, game, learning and analysis code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in tests (1e-12 and
/// tighter) only hold for `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("float conversion from f64 never fails")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float conversion to f64 never fails")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `10^(db/10)`.
#[inline]
pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// dBm to watts.
#[inline]
pub fn dbm_to_watts<T: Scalar>(dbm: T) -> T {
    db_to_linear(dbm - T::lit(30.0))
}

#[inline]
pub fn watts_to_dbm<T: Scalar>(watts: T) -> T {
    T::lit(10.0) * watts.log10() + T::lit(30.0)
}
