use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use crate::error::{Error, Result};
use crate::scalar::{conv, Real};

/// A value in `[0, +inf]`.
///
/// Products and quotients follow `0·inf = inf/inf = 0/0 = 0`; dividing a positive number by
/// zero gives `+inf`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ExtReal<T>(T);

impl<T: Real> ExtReal<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_nan() || value < T::zero() {
            return Err(Error::Numerical(format!("{value} is not in [0, +inf]")));
        }
        Ok(Self(value))
    }

    /// Wraps a value produced internally; NaN and tiny negative rounding noise collapse to 0.
    pub(crate) fn from_raw(value: T) -> Self {
        if value.is_nan() || value < T::zero() {
            Self(T::zero())
        } else {
            Self(value)
        }
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    pub fn infinity() -> Self {
        Self(T::infinity())
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn powf(self, e: T) -> Self {
        Self::from_raw(conv::pow(self.0, e))
    }

    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    /// `|self - other| / max(self, other)`; equal infinities count as agreement.
    pub fn relative_diff(self, other: Self) -> T {
        match (self.is_infinite(), other.is_infinite()) {
            (true, true) => T::zero(),
            (true, false) | (false, true) => T::infinity(),
            _ => {
                let scale = self.0.max(other.0);
                if scale.is_zero() {
                    T::zero()
                } else {
                    (self.0 - other.0).abs() / scale
                }
            }
        }
    }
}

impl<T: Real> Add for ExtReal<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl<T: Real> Mul for ExtReal<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(conv::mul(self.0, rhs.0))
    }
}

impl<T: Real> Div for ExtReal<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self(conv::div(self.0, rhs.0))
    }
}

impl<T: Real> Eq for ExtReal<T> {}

impl<T: Real> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for ExtReal<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).unwrap_or(Ordering::Equal)
    }
}

impl<T: fmt::Debug> fmt::Debug for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl<T: Real> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl<T: Real> std::iter::Sum for ExtReal<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = ExtReal<f64>;

    #[test]
    fn zero_infinity_conventions() {
        assert_eq!(E::zero() * E::infinity(), E::zero());
        assert_eq!(E::infinity() * E::zero(), E::zero());
        assert_eq!(E::infinity() / E::infinity(), E::zero());
        assert_eq!(E::zero() / E::zero(), E::zero());
        assert_eq!(E::new(3.0).unwrap() / E::zero(), E::infinity());
        assert_eq!(E::new(3.0).unwrap() / E::infinity(), E::zero());
        assert_eq!(E::infinity() + E::new(1.0).unwrap(), E::infinity());
    }

    #[test]
    fn finite_arithmetic_is_plain() {
        let a = E::new(1.5).unwrap();
        let b = E::new(4.0).unwrap();
        assert_eq!((a + b).value(), 5.5);
        assert_eq!((a * b).value(), 6.0);
        assert_eq!((b / a).value(), 4.0 / 1.5);
    }

    #[test]
    fn powers_of_extremes() {
        assert_eq!(E::zero().powf(-0.5), E::infinity());
        assert_eq!(E::infinity().powf(-2.0), E::zero());
        assert_eq!(E::infinity().powf(0.5), E::infinity());
        assert_eq!(E::new(4.0).unwrap().powf(0.5).value(), 2.0);
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(E::new(-1.0).is_err());
        assert!(E::new(f64::NAN).is_err());
    }

    #[test]
    fn ordering_puts_infinity_last() {
        let mut v = vec![E::infinity(), E::new(2.0).unwrap(), E::zero()];
        v.sort();
        assert_eq!(v, vec![E::zero(), E::new(2.0).unwrap(), E::infinity()]);
    }
}
