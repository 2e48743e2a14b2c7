//! Scalar abstraction shared by every model in the crate.
//!
//! Fields, frame matrices and cutoff profiles are written once against
//! [`Scalar`] and evaluated with `f64` for numerics, `f32` for cheap sweeps,
//! and [`Dual`](crate::dual::Dual) for exact directional derivatives.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar usable by the geometry kernels.
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar (derivative parts are zero).
    fn lit(v: f64) -> Self;

    /// Primal value, used for branch decisions such as patch selection.
    fn re(&self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn re(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn re(&self) -> f64 {
        *self as f64
    }
}

/// Lifts a slice of `f64` coordinates into another scalar type.
pub fn lift<T: Scalar>(p: &[f64]) -> Vec<T> {
    p.iter().map(|&v| T::lit(v)).collect()
}

/// Primal values of a slice of scalars.
pub fn primal<T: Scalar>(p: &[T]) -> Vec<f64> {
    p.iter().map(Scalar::re).collect()
}
