//! Intervals, weights, quadrature and the derived quantities `W*` and `V_p`.

pub(crate) mod ess_sup;
pub(crate) mod exponents;
pub(crate) mod interval;
pub(crate) mod quadrature;
pub(crate) mod weight;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::scalar::{conv, Real};

pub use ess_sup::ess_sup;
pub use exponents::{Exponents, HardyExponents, MonotoneExponents};
pub use interval::{Interval, Loc};
pub use quadrature::Quadrature;
pub use weight::Weight;

/// `∫_x^y w` to relative accuracy `tol`; `+inf` when divergence is detected.
pub fn integrate<T: Real>(w: &Weight<T>, iv: &Interval<T>, x: T, y: T, tol: T) -> Result<ExtReal<T>> {
    iv.check_range(x, y)?;
    integrate_fn(&Quadrature::with_tol(tol), iv, x, y, &w.kinks(iv), |l| w.eval(iv, l)).map(ExtReal::from_raw)
}

/// `W*(t) = ∫_t^b w`.
pub fn wstar<T: Real>(w: &Weight<T>, iv: &Interval<T>, t: T) -> Result<ExtReal<T>> {
    integrate(w, iv, t, iv.b(), Quadrature::<T>::default().tol)
}

/// `V_p(x, y)`: `(∫_x^y v^{-1/(p-1)})^{(p-1)/p}` for `p > 1`, `ess sup_{(x,y)} 1/v` for `p = 1`.
pub fn vp<T: Real>(v: &Weight<T>, iv: &Interval<T>, p: T, x: T, y: T) -> Result<ExtReal<T>> {
    if p.is_nan() || p < T::one() {
        return Err(Error::InvalidExponents(format!("V_p needs p >= 1, got {p}")));
    }
    iv.check_range(x, y)?;
    if x == y {
        return Ok(ExtReal::zero());
    }
    if p == T::one() {
        let s = ess_sup::ess_sup_loc(iv, x, y, |l| conv::div(T::one(), v.eval(iv, l)));
        return Ok(ExtReal::from_raw(s.value));
    }
    let mass = dual_mass(v, iv, p, x, y, &Quadrature::default())?;
    Ok(ExtReal::from_raw(conv::pow(mass, (p - T::one()) / p)))
}

/// `∫_x^y v^{-1/(p-1)}` for `p > 1`.
pub(crate) fn dual_mass<T: Real>(v: &Weight<T>, iv: &Interval<T>, p: T, x: T, y: T, quad: &Quadrature<T>) -> Result<T> {
    let e = -T::one() / (p - T::one());
    integrate_fn(quad, iv, x, y, &v.kinks(iv), |l| dual_density(v.eval(iv, l), e))
}

/// `v^e` for negative `e`, with `0^e = inf`.
#[inline]
pub(crate) fn dual_density<T: Real>(v: T, e: T) -> T {
    if v.is_zero() {
        T::infinity()
    } else {
        v.powf(e)
    }
}

/// Integrates over `[x, y]`, splitting at `kinks`; panels are graded only toward `a` and `b`,
/// where the weights may be singular.
pub(crate) fn integrate_fn<T, F>(quad: &Quadrature<T>, iv: &Interval<T>, x: T, y: T, kinks: &[T], g: F) -> Result<T>
where
    T: Real,
    F: Fn(Loc<T>) -> T,
{
    if x >= y {
        return Ok(T::zero());
    }
    let mut cuts = vec![x];
    cuts.extend(kinks.iter().copied().filter(|k| *k > x && *k < y));
    cuts.push(y);
    let mut total = T::zero();
    for w in cuts.windows(2) {
        let grade_lo = w[0] == iv.a();
        let grade_hi = w[1] == iv.b();
        let part = quad.integrate_graded(iv, w[0], w[1], &g, grade_lo, grade_hi)?;
        if part.is_infinite() {
            return Ok(T::infinity());
        }
        total = total + part;
    }
    Ok(total)
}
