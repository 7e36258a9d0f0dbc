//! Scalar abstraction shared by the numeric modules.
//!
//! Storage and metric code is written against [`Scalar`] so the same routines
//! serve `f32` embedding stores and `f64` analytics.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; `Float` types always have a representation.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("float conversion")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("float conversion")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("float conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
