//! Essential suprema of piecewise-continuous functions by grid search.

use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::measure::interval::{Interval, Loc};
use crate::scalar::{count, lit, Real};

const GRID: usize = 4096;
const REFINE: usize = 64;
const PROBES: i32 = 40;
const BLOWUP_RUN: usize = 10;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SupPoint<T> {
    pub value: T,
    pub arg: T,
}

/// `ess sup_{(x, y)} g` for piecewise-continuous `g`, with +inf for monotone endpoint blow-up.
pub fn ess_sup<T, F>(g: F, x: T, y: T) -> Result<ExtReal<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if x == y {
        return Ok(ExtReal::zero());
    }
    let iv = Interval::new(x, y)?;
    Ok(ExtReal::from_raw(ess_sup_loc(&iv, x, y, |l| g(l.x)).value))
}

pub(crate) fn ess_sup_loc<T, F>(iv: &Interval<T>, x: T, y: T, g: F) -> SupPoint<T>
where
    T: Real,
    F: Fn(Loc<T>) -> T,
{
    let mut best = SupPoint {
        value: T::zero(),
        arg: x,
    };
    if x >= y {
        return best;
    }
    let (sx, sy) = (iv.to_param(x), iv.to_param(y));
    let len = sy - sx;
    let at_param = |s: T| {
        let t = iv.from_param(s);
        (t, g(iv.loc(t)))
    };
    let consider = |best: &mut SupPoint<T>, t: T, v: T| {
        if v > best.value {
            *best = SupPoint { value: v, arg: t };
        }
    };

    // Uniform grid in the parameter, then two zoom rounds around the best grid point.
    let mut best_s = sx;
    let mut best_grid = T::neg_infinity();
    for i in 0..GRID {
        let s = sx + len * (count::<T>(i) + lit(0.5)) / count(GRID);
        let (t, v) = at_param(s);
        if v > best_grid {
            best_grid = v;
            best_s = s;
        }
        consider(&mut best, t, v);
    }
    let mut h = len / count(GRID);
    for _ in 0..2 {
        let lo = (best_s - h).max(sx);
        let hi = (best_s + h).min(sy);
        let step = (hi - lo) / count(REFINE + 1);
        let mut local_best = best_s;
        let mut local_val = T::neg_infinity();
        for i in 1..=REFINE {
            let s = lo + step * count(i);
            let (t, v) = at_param(s);
            if v > local_val {
                local_val = v;
                local_best = s;
            }
            consider(&mut best, t, v);
        }
        best_s = local_best;
        h = step;
    }

    // Probes approaching each endpoint; distances are exact offsets where the end is finite.
    for left in [true, false] {
        let mut run = Vec::with_capacity(PROBES as usize);
        for j in 1..=PROBES {
            let frac = lit::<T>(2.0).powi(-j);
            let (t, v) = match (left, x.is_finite() && y.is_finite()) {
                (true, true) => {
                    let d = (y - x) * frac;
                    let l = Loc {
                        x: x + d,
                        from_a: (x - iv.a()) + d,
                        to_b: (iv.b() - x) - d,
                    };
                    (l.x, g(l))
                }
                (false, true) => {
                    let d = (y - x) * frac;
                    let l = Loc {
                        x: y - d,
                        from_a: (y - iv.a()) - d,
                        to_b: (iv.b() - y) + d,
                    };
                    (l.x, g(l))
                }
                (true, false) => at_param(sx + len * frac),
                (false, false) => at_param(sy - len * frac),
            };
            if !v.is_nan() {
                consider(&mut best, t, v);
            }
            run.push(v);
        }
        let tail = &run[run.len() - BLOWUP_RUN..];
        let blows_up = tail.iter().all(|v| v.is_finite() && *v > T::zero())
            && tail.windows(2).all(|w| w[1] >= w[0] * lit(1.01));
        if blows_up {
            let arg = if left { x } else { y };
            return SupPoint {
                value: T::infinity(),
                arg,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let v = ess_sup(|s: f64| s * (1.0 - s), 0.0, 1.0).unwrap();
        assert!((v.value() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn constant() {
        let v = ess_sup(|_| 3.5f64, 0.0, 1.0).unwrap();
        assert_eq!(v.value(), 3.5);
    }

    #[test]
    fn endpoint_blow_up() {
        assert!(ess_sup(|s: f64| s.powf(-0.5), 0.0, 1.0).unwrap().is_infinite());
        assert!(ess_sup(|s: f64| (1.0 - s).powf(-0.1), 0.0, 1.0).unwrap().is_infinite());
        assert!(ess_sup(|s: f64| (1.0 / s).ln(), 0.0, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn bounded_monotone_is_finite() {
        let v = ess_sup(|s: f64| 1.0 - s, 0.0, 1.0).unwrap();
        assert!((v.value() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn ignores_single_points() {
        // A point value does not change the essential supremum as long as the grid misses it.
        let v = ess_sup(|s: f64| if s == 0.3 { 100.0 } else { 1.0 }, 0.0, 1.0).unwrap();
        assert_eq!(v.value(), 1.0);
    }

    #[test]
    fn half_line() {
        let iv = Interval::new(0.0, f64::INFINITY).unwrap();
        let p = ess_sup_loc(&iv, 0.0, f64::INFINITY, |l| l.x * (-l.x).exp());
        assert!((p.value - (-1.0f64).exp()).abs() < 1e-8);
        assert!((p.arg - 1.0).abs() < 1e-3);
    }
}
