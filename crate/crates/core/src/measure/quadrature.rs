//! Adaptive Gauss–Kronrod quadrature with geometric grading toward endpoints.
//!
//! Each half of an integration range is split into dyadic panels `[h 2^-(j+1), h 2^-j]`
//! measured from its endpoint, and every panel is integrated by adaptive G7–K15 bisection.
//! Power-type endpoint behaviour makes the panel contributions geometric, so the tail is
//! extrapolated once their ratio settles; contributions that stop decaying mean divergence.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::interval::{Interval, Loc};
use crate::scalar::{lit, Real};

/// Depth from which [`Quadrature::adaptive`] stops bisecting panels whose error does not shrink.
const ROUNDOFF_DEPTH: u32 = 6;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Settings for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    /// Relative accuracy target.
    pub tol: T,
    /// Maximum bisection depth inside one panel.
    pub max_depth: u32,
    /// Partial sums above this value that are still growing by more than 5% per panel are
    /// declared divergent.
    pub divergence_threshold: T,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self::with_tol(lit(1e-8))
    }
}

/// Integral over one half-range, before endpoint bookkeeping.
enum Half<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> Quadrature<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol: tol.max(T::tolerance_floor()),
            max_depth: 40,
            divergence_threshold: lit(1e12),
        }
    }

    /// `∫_x^y g` over a sub-range of `iv`. The integrand must be non-negative.
    ///
    /// Returns `+inf` when divergence is detected.
    pub fn integrate<F>(&self, iv: &Interval<T>, x: T, y: T, g: F) -> Result<ExtReal<T>>
    where
        F: Fn(Loc<T>) -> T,
    {
        iv.check_range(x, y)?;
        self.integrate_graded(iv, x, y, &g, true, true)
            .map(ExtReal::from_raw)
    }

    /// Core entry point used by meshes: grading toward each end is optional.
    pub(crate) fn integrate_graded<F>(
        &self,
        iv: &Interval<T>,
        x: T,
        y: T,
        g: &F,
        grade_lo: bool,
        grade_hi: bool,
    ) -> Result<T>
    where
        F: Fn(Loc<T>) -> T,
    {
        if x >= y {
            return Ok(T::zero());
        }
        let (a, b) = (iv.a(), iv.b());
        let two = lit::<T>(2.0);
        let half = lit::<T>(0.5);

        match (x.is_finite(), y.is_finite()) {
            (true, true) => {
                let h = (y - x) * half;
                let left = |d: T| {
                    g(Loc {
                        x: x + d,
                        from_a: (x - a) + d,
                        to_b: (b - x) - d,
                    })
                };
                let right = |e: T| {
                    g(Loc {
                        x: y - e,
                        from_a: (y - a) - e,
                        to_b: (b - y) + e,
                    })
                };
                let l = self.half(h, &left, grade_lo)?;
                let r = self.half(h, &right, grade_hi)?;
                Ok(combine(l, r))
            }
            (true, false) => {
                // t = x + s / (1 - s), s in [0, 1)
                let near = |d: T| {
                    let om = T::one() - d;
                    let t = d / om;
                    g(Loc {
                        x: x + t,
                        from_a: (x - a) + t,
                        to_b: T::infinity(),
                    }) / (om * om)
                };
                let far = |tau: T| {
                    let t = (T::one() - tau) / tau;
                    let v = g(Loc {
                        x: x + t,
                        from_a: (x - a) + t,
                        to_b: T::infinity(),
                    });
                    if v.is_zero() {
                        T::zero()
                    } else {
                        v / (tau * tau)
                    }
                };
                let l = self.half(half, &near, grade_lo)?;
                let r = self.half(half, &far, true)?;
                Ok(combine(l, r))
            }
            (false, true) => {
                // t = y - s / (1 - s)
                let near = |d: T| {
                    let om = T::one() - d;
                    let t = d / om;
                    g(Loc {
                        x: y - t,
                        from_a: T::infinity(),
                        to_b: (b - y) + t,
                    }) / (om * om)
                };
                let far = |tau: T| {
                    let t = (T::one() - tau) / tau;
                    let v = g(Loc {
                        x: y - t,
                        from_a: T::infinity(),
                        to_b: (b - y) + t,
                    });
                    if v.is_zero() {
                        T::zero()
                    } else {
                        v / (tau * tau)
                    }
                };
                let l = self.half(half, &far, true)?;
                let r = self.half(half, &near, grade_hi)?;
                Ok(combine(l, r))
            }
            (false, false) => {
                let m = T::zero();
                let l = self.integrate_graded(iv, x, m, g, true, false)?;
                let r = self.integrate_graded(iv, m, y, g, false, true)?;
                let _ = two;
                Ok(l + r)
            }
        }
    }

    fn half<F: Fn(T) -> T>(&self, h: T, f: &F, graded: bool) -> Result<Half<T>> {
        if graded {
            self.graded_half(h, f)
        } else {
            self.adaptive(f, T::zero(), h).map(|v| {
                if v.is_finite() {
                    Half::Finite(v)
                } else {
                    Half::Divergent
                }
            })
        }
    }

    /// `∫_0^h f` with dyadic panels accumulating toward 0.
    fn graded_half<F: Fn(T) -> T>(&self, h: T, f: &F) -> Result<Half<T>> {
        let half = lit::<T>(0.5);
        let floor = T::min_positive_value() * lit(1024.0);
        let nondecay = T::one() - lit(1e-6);
        let mut sum = T::zero();
        let mut hi = h;
        let mut prev: [T; 3] = [T::zero(); 3]; // c_{j-1}, c_{j-2}, c_{j-3}
        let mut seen = 0usize;
        let mut zero_run = 0usize;
        let mut flat_run = 0usize;
        loop {
            let lo = hi * half;
            let c = self.adaptive(f, lo, hi)?;
            if !c.is_finite() {
                return Ok(Half::Divergent);
            }
            sum = sum + c;
            if sum > self.divergence_threshold && c > lit::<T>(0.05) * (sum - c) {
                return Ok(Half::Divergent);
            }
            if c.is_zero() {
                zero_run += 1;
                if zero_run >= 64 {
                    return Ok(Half::Finite(sum));
                }
                prev = [T::zero(); 3];
                seen = 0;
                flat_run = 0;
                hi = lo;
                if lo < floor {
                    return Ok(Half::Finite(sum));
                }
                continue;
            }
            zero_run = 0;
            if seen >= 1 {
                let rho1 = c / prev[0];
                if rho1 >= nondecay {
                    flat_run += 1;
                    if flat_run >= 8 {
                        return Ok(Half::Divergent);
                    }
                } else {
                    flat_run = 0;
                    let tail = c * rho1 / (T::one() - rho1);
                    let budget = self.tol * lit::<T>(0.1) * sum;
                    if tail <= budget {
                        return Ok(Half::Finite(sum + tail));
                    }
                    if seen >= 3 {
                        let rho2 = prev[0] / prev[1];
                        let rho3 = prev[1] / prev[2];
                        let drift = (rho1 - rho2).abs() + (rho2 - rho3).abs();
                        if tail * drift <= budget * (T::one() - rho1) {
                            return Ok(Half::Finite(sum + tail));
                        }
                    }
                }
            }
            prev = [c, prev[0], prev[1]];
            seen += 1;
            hi = lo;
            if lo < floor {
                let rho = c / prev[1];
                if seen >= 2 && rho < nondecay {
                    return Ok(Half::Finite(sum + c * rho / (T::one() - rho)));
                }
                return Ok(Half::Divergent);
            }
        }
    }

    /// Adaptive G7–K15 bisection on `[lo, hi]`; `+inf` if any node evaluates to `+inf`.
    pub(crate) fn adaptive<F: Fn(T) -> T>(&self, f: &F, lo: T, hi: T) -> Result<T> {
        let (k0, e0) = gk15(f, lo, hi);
        if k0.is_nan() {
            return Err(Error::Numerical(format!(
                "integrand produced NaN on [{lo}, {hi}]"
            )));
        }
        if !k0.is_finite() {
            return Ok(T::infinity());
        }
        let mut total = T::zero();
        let mut stack = vec![(lo, hi, k0, e0, 0u32)];
        while let Some((l, r, k, e, depth)) = stack.pop() {
            let accept = e <= self.tol * k.abs()
                || e <= T::min_positive_value()
                || depth >= self.max_depth
                || (r - l) <= (l.abs() + r.abs()) * T::epsilon() * lit(4.0);
            if accept {
                total = total + k;
                continue;
            }
            let m = l + (r - l) * lit(0.5);
            let (k1, e1) = gk15(f, l, m);
            let (k2, e2) = gk15(f, m, r);
            for v in [k1, k2] {
                if v.is_nan() {
                    return Err(Error::Numerical(format!(
                        "integrand produced NaN on [{l}, {r}]"
                    )));
                }
                if !v.is_finite() {
                    return Ok(T::infinity());
                }
            }
            if depth >= ROUNDOFF_DEPTH && e1 + e2 > lit::<T>(0.75) * e {
                // Bisection no longer reduces the error: the integrand is at rounding-noise level
                // (e.g. a cell only a few ulps wide relative to its position).
                total = total + k1 + k2;
                continue;
            }
            stack.push((l, m, k1, e1, depth + 1));
            stack.push((m, r, k2, e2, depth + 1));
        }
        Ok(total)
    }
}

fn combine<T: Real>(l: Half<T>, r: Half<T>) -> T {
    match (l, r) {
        (Half::Finite(a), Half::Finite(b)) => a + b,
        _ => T::infinity(),
    }
}

/// Kronrod estimate and `|K15 - G7|`.
fn gk15<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T) -> (T, T) {
    let c = (lo + hi) * lit(0.5);
    let h = (hi - lo) * lit(0.5);
    let fc = f(c);
    let mut k = fc * lit(WGK[7]);
    let mut g = fc * lit(WG[3]);
    for i in 0..7 {
        let dx = h * lit(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        k = k + s * lit(WGK[i]);
        if i % 2 == 1 {
            g = g + s * lit(WG[i / 2]);
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).abs())
}
