use std::fmt::{Debug, Display};

use ndarray::NdFloat;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point element type used throughout the numeric core.
///
/// Implemented for `f32` and `f64`. Absolute tolerances in the crate are
/// written for `f64`; [`Scalar::tolerance`] widens them to what the type can
/// actually resolve.
pub trait Scalar:
    NdFloat + Float + FromPrimitive + ToPrimitive + Default + Serialize + DeserializeOwned + Debug + Display
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// `max(abs, k·ε·scale)`: an absolute tolerance that stays reachable in
    /// lower precision.
    fn tolerance(abs: f64, scale: Self) -> Self {
        let floor = Self::epsilon() * Self::of(64.0) * (Self::one() + scale.abs());
        Self::of(abs).max(floor)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
