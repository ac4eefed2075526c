//! Dyadic discretizing sequences of the tail mass `W*` and the equivalence lemmas built on them.

mod lemmas;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::{integrate_fn, Interval, Quadrature, Weight};
use crate::scalar::{int, lit, Real};

pub use lemmas::{lemma_pair, LemmaInput, LemmaKind, LemmaPair, NonNegSequence};

const BISECTION_CAP: usize = 200;

/// Points `x_k`, `k = first..=last`, with `W*(x_k) = 2^{-k}`.
///
/// When `W*(a)` is finite the first point is `x_N = a` with `N = ⌈-log2 W*(a)⌉`. Otherwise the
/// ladder is cut below at `-trunc` (or at the first index whose point is still resolvable in
/// floating point) and [`DiscretizingSequence::n`] is `None`.
#[derive(Debug, Clone)]
pub struct DiscretizingSequence<T> {
    iv: Interval<T>,
    weight: Weight<T>,
    first: i64,
    points: Vec<T>,
    wstar: Vec<T>,
    n: Option<i64>,
    trunc: i64,
}

impl<T: Real> DiscretizingSequence<T> {
    pub fn interval(&self) -> &Interval<T> {
        &self.iv
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    /// `N`, or `None` when the ladder is unbounded below.
    pub fn n(&self) -> Option<i64> {
        self.n
    }

    pub fn is_lower_truncated(&self) -> bool {
        self.n.is_none()
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn last_index(&self) -> i64 {
        self.first + self.points.len() as i64 - 1
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// `W*(x_k)` as computed during construction.
    pub fn wstar_values(&self) -> &[T] {
        &self.wstar
    }

    pub fn point(&self, k: i64) -> Option<T> {
        self.offset(k).map(|i| self.points[i])
    }

    pub fn wstar_at(&self, k: i64) -> Option<T> {
        self.offset(k).map(|i| self.wstar[i])
    }

    fn offset(&self, k: i64) -> Option<usize> {
        if k < self.first || k > self.last_index() {
            None
        } else {
            Some((k - self.first) as usize)
        }
    }

    /// `(k, x_k, W*(x_k))` triples in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T, T)> + '_ {
        self.points
            .iter()
            .zip(&self.wstar)
            .enumerate()
            .map(move |(i, (x, w))| (self.first + i as i64, *x, *w))
    }
}

fn tail_mass<T: Real>(w: &Weight<T>, iv: &Interval<T>, kinks: &[T], quad: &Quadrature<T>, t: T) -> Result<T> {
    integrate_fn(quad, iv, t, iv.b(), kinks, |l| w.eval(iv, l))
}

/// Builds `{x_k}` for `k` up to `k_max` (at least one step past `N`).
pub fn build_discretizing_sequence<T: Real>(
    w: &Weight<T>,
    iv: &Interval<T>,
    k_max: i64,
) -> Result<DiscretizingSequence<T>> {
    w.validate()?;
    let quad = Quadrature::with_tol(lit(1e-12));
    let kinks = w.kinks(iv);
    let wstar = |t: T| tail_mass(w, iv, &kinks, &quad, t);
    let total = wstar(iv.a())?;
    if total.is_zero() {
        return Err(Error::DegenerateWeight);
    }
    let two = lit::<T>(2.0);
    let (n, first_target) = if total.is_finite() {
        let l = -total.log2();
        let n = if (l - l.round()).abs() < lit(1e-12) { l.round() } else { l.ceil() };
        let n = n.to_i64().ok_or_else(|| Error::Numerical(format!("W*(a) = {total} is out of range")))?;
        (Some(n), n + 1)
    } else {
        (None, -k_max)
    };
    let last = k_max.max(first_target);

    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut first = first_target;
    if let Some(n) = n {
        points.push(iv.a());
        values.push(total);
        first = n;
    }
    let mut lo = iv.to_param(iv.a());
    let s_hi = iv.to_param(iv.b());
    for k in first_target..=last {
        let target = two.powf(int(-k));
        let mut a = lo;
        let mut b = s_hi;
        let mut best: Option<(T, T)> = None;
        for _ in 0..BISECTION_CAP {
            let mid = a + (b - a) * lit(0.5);
            if mid <= a || mid >= b {
                break;
            }
            let x = iv.from_param(mid);
            let v = wstar(x)?;
            if v.is_nan() {
                return Err(Error::Numerical(format!("W*({x}) is NaN")));
            }
            let rel = ((v - target) / target).abs();
            if best.map_or(true, |(_, bv)| rel < ((bv - target) / target).abs()) {
                best = Some((x, v));
            }
            if rel <= lit(1e-10) {
                break;
            }
            if v > target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let Some((x, v)) = best else { continue };
        let resolved = ((v - target) / target).abs() <= lit(1e-6);
        if !resolved && points.is_empty() {
            // Below floating-point resolution at the lower end: start the ladder later.
            first = k + 1;
            continue;
        }
        if !resolved || points.last().is_some_and(|p| x <= *p) {
            break;
        }
        points.push(x);
        values.push(v);
        lo = iv.to_param(x);
    }
    if points.len() < 2 {
        return Err(Error::Numerical("discretizing sequence has fewer than two resolvable points".into()));
    }
    Ok(DiscretizingSequence {
        iv: *iv,
        weight: w.clone(),
        first,
        points,
        wstar: values,
        n,
        trunc: k_max,
    })
}

/// Rebuilds the sequence with twice the truncation depth.
pub fn deepen<T: Real>(ds: &DiscretizingSequence<T>) -> Result<DiscretizingSequence<T>> {
    build_discretizing_sequence(&ds.weight, &ds.iv, 2 * ds.trunc.max(1))
}

#[doc(hidden)]
pub fn wstar_precise<T: Real>(w: &Weight<T>, iv: &Interval<T>, t: T) -> Result<ExtReal<T>> {
    let quad = Quadrature::with_tol(lit(1e-12));
    tail_mass(w, iv, &w.kinks(iv), &quad, t).map(ExtReal::from_raw)
}
