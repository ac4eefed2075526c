use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// An interval `(a, b)` with `-inf <= a < b <= +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    a: T,
    b: T,
}

/// A point of `(a, b)` together with its distances to both endpoints.
///
/// Quadrature near an endpoint passes the distance directly, so weights such as
/// `(x - a)^alpha` stay accurate far below the resolution of `x` itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loc<T> {
    pub x: T,
    pub from_a: T,
    pub to_b: T,
}

impl<T: Real> Interval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        let ok = !a.is_nan()
            && !b.is_nan()
            && a < b
            && a != T::infinity()
            && b != T::neg_infinity();
        if !ok {
            return Err(Error::InvalidInterval {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self {
            a: T::zero(),
            b: T::one(),
        }
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn loc(&self, x: T) -> Loc<T> {
        Loc {
            x,
            from_a: x - self.a,
            to_b: self.b - x,
        }
    }

    /// Maps `[a, b]` monotonically onto a bounded parameter range (identity when bounded).
    pub(crate) fn to_param(&self, x: T) -> T {
        let one = T::one();
        match (self.a.is_finite(), self.b.is_finite()) {
            (true, true) => x,
            (true, false) => {
                if x.is_infinite() {
                    one
                } else {
                    let d = x - self.a;
                    d / (one + d)
                }
            }
            (false, true) => {
                if x.is_infinite() {
                    T::zero()
                } else {
                    one / (one + (self.b - x))
                }
            }
            (false, false) => {
                if x == T::neg_infinity() {
                    T::zero()
                } else if x == T::infinity() {
                    one
                } else {
                    x.atan() / T::PI() + lit(0.5)
                }
            }
        }
    }

    /// Inverse of [`Interval::to_param`].
    pub(crate) fn from_param(&self, s: T) -> T {
        let one = T::one();
        match (self.a.is_finite(), self.b.is_finite()) {
            (true, true) => s,
            (true, false) => {
                if s >= one {
                    T::infinity()
                } else {
                    self.a + s / (one - s)
                }
            }
            (false, true) => {
                if s <= T::zero() {
                    T::neg_infinity()
                } else {
                    self.b - (one - s) / s
                }
            }
            (false, false) => {
                if s <= T::zero() {
                    T::neg_infinity()
                } else if s >= one {
                    T::infinity()
                } else {
                    (T::PI() * (s - lit(0.5))).tan()
                }
            }
        }
    }

    pub(crate) fn check_range(&self, x: T, y: T) -> Result<()> {
        if x > y {
            return Err(Error::InvalidRange {
                x: x.to_f64().unwrap_or(f64::NAN),
                y: y.to_f64().unwrap_or(f64::NAN),
            });
        }
        for p in [x, y] {
            if !self.contains(p) {
                return Err(Error::OutOfInterval {
                    x: p.to_f64().unwrap_or(f64::NAN),
                    a: self.a.to_f64().unwrap_or(f64::NAN),
                    b: self.b.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }
}
