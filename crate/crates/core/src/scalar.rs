//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Smallest relative quadrature tolerance that makes sense for this precision.
    fn tolerance_floor() -> Self {
        Self::epsilon() * lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Converts a signed integer into the working scalar.
#[inline]
pub fn int<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("integer representable in scalar type")
}

/// Arithmetic on `[0, +inf]` under the conventions `0·inf = inf/inf = 0/0 = 0`.
///
/// These operate on raw scalars so inner loops stay allocation- and branch-light; the
/// public value type [`crate::ExtReal`] is built on top of them.
pub mod conv {
    use super::Real;

    #[inline]
    pub fn mul<T: Real>(a: T, b: T) -> T {
        if a.is_zero() || b.is_zero() {
            T::zero()
        } else {
            a * b
        }
    }

    #[inline]
    pub fn div<T: Real>(a: T, b: T) -> T {
        if a.is_zero() || (a.is_infinite() && b.is_infinite()) {
            T::zero()
        } else if b.is_zero() {
            T::infinity()
        } else {
            a / b
        }
    }

    /// `a^e` for `a >= 0`, with `0^e = inf` and `inf^e = 0` when `e < 0`, and `a^0 = 1`.
    #[inline]
    pub fn pow<T: Real>(a: T, e: T) -> T {
        if e.is_zero() {
            T::one()
        } else if e == T::one() {
            a
        } else {
            a.powf(e)
        }
    }
}
