//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate (edge lengths, probabilities, distances)
//! is generic over [`Real`], which is implemented for `f32` and `f64`.
//! Concrete aliases for the common `f64` instantiation live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::{Product, Sum};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Product + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Product
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for converting an `f64` literal into the working scalar type.
pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// Tolerance for "sums to one" style checks: the documented `f64` contract,
/// widened for scalar types whose epsilon is coarser.
pub(crate) fn stochastic_tol<F: Real>() -> F {
    let contract = real::<F>(1e-12);
    let ulps = F::epsilon() * real::<F>(64.0);
    if ulps > contract {
        ulps
    } else {
        contract
    }
}
