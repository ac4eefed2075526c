use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponents `(p, q, r)` of the iterated inequality: `1 <= p < inf`, `0 < q, r < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

impl<T: Real> Exponents<T> {
    pub fn new(p: T, q: T, r: T) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && r.is_finite()) {
            return Err(Error::InvalidExponents(format!(
                "p, q, r must be finite (got {p}, {q}, {r})"
            )));
        }
        if p < T::one() {
            return Err(Error::InvalidExponents(format!(
                "p = {p} < 1: the inequality only holds for trivial functions"
            )));
        }
        if q <= T::zero() || r <= T::zero() {
            return Err(Error::InvalidExponents(format!(
                "q and r must be positive (got q = {q}, r = {r})"
            )));
        }
        Ok(Self { p, q, r })
    }
}

/// Exponents `(p, q)` of the inequality restricted to non-decreasing functions; `p < 1` is allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneExponents<T> {
    pub p: T,
    pub q: T,
}

impl<T: Real> MonotoneExponents<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        if !(p.is_finite() && q.is_finite()) || p <= T::zero() || q <= T::zero() {
            return Err(Error::InvalidExponents(format!(
                "monotone exponents need 0 < p, q < inf (got p = {p}, q = {q})"
            )));
        }
        Ok(Self { p, q })
    }
}

/// Exponents `(p, q)` of a two-level (local) Hardy inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyExponents<T> {
    pub p: T,
    pub q: T,
}

impl<T: Real> HardyExponents<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        Exponents::new(p, q, T::one()).map(|e| Self { p: e.p, q: e.q })
    }
}

impl<T: Real> From<Exponents<T>> for HardyExponents<T> {
    fn from(e: Exponents<T>) -> Self {
        Self { p: e.p, q: e.q }
    }
}
