use crate::error::{Error, Result};
use crate::measure::interval::{Interval, Loc};
use crate::scalar::{conv, Real};

/// A non-negative weight on an interval `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight<T> {
    /// `c · (x - a)^alpha · (b - x)^beta`; a factor is dropped when its endpoint is infinite.
    PowerLaw { c: T, alpha: T, beta: T },
    /// `values[i]` on `[breakpoints[i-1], breakpoints[i])`, with `values.len() == breakpoints.len() + 1`.
    PiecewiseConstant { breakpoints: Vec<T>, values: Vec<T> },
    /// Piecewise-linear interpolation of `(grid, values)`, in log space when every value is
    /// positive; constant beyond the first and last grid points.
    Tabulated { grid: Vec<T>, values: Vec<T> },
}

impl<T: Real> Weight<T> {
    pub fn constant(c: T) -> Self {
        Weight::PowerLaw {
            c,
            alpha: T::zero(),
            beta: T::zero(),
        }
    }

    pub fn power_law(c: T, alpha: T, beta: T) -> Self {
        Weight::PowerLaw { c, alpha, beta }
    }

    pub fn piecewise_constant(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        let w = Weight::PiecewiseConstant { breakpoints, values };
        w.validate()?;
        Ok(w)
    }

    pub fn tabulated(grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        let w = Weight::Tabulated { grid, values };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidWeight(m));
        let nonneg = |v: &T| v.is_finite() && *v >= T::zero();
        match self {
            Weight::PowerLaw { c, alpha, beta } => {
                if !nonneg(c) || !alpha.is_finite() || !beta.is_finite() {
                    return bad(format!("power law needs finite c >= 0 and finite exponents, got ({c}, {alpha}, {beta})"));
                }
            }
            Weight::PiecewiseConstant { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad(format!(
                        "piecewise constant weight needs {} values for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        values.len()
                    ));
                }
                if !strictly_increasing(breakpoints) {
                    return bad("breakpoints must be finite and strictly increasing".into());
                }
                if !values.iter().all(nonneg) {
                    return bad("piecewise constant values must be finite and >= 0".into());
                }
            }
            Weight::Tabulated { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return bad("tabulated weight needs at least two (grid, value) pairs of equal length".into());
                }
                if !strictly_increasing(grid) {
                    return bad("tabulation grid must be finite and strictly increasing".into());
                }
                if !values.iter().all(nonneg) {
                    return bad("tabulated values must be finite and >= 0".into());
                }
            }
        }
        Ok(())
    }

    /// Power laws with an exponent `<= -1` at a finite endpoint may fail to be locally integrable.
    pub fn possibly_non_integrable(&self, iv: &Interval<T>) -> bool {
        match self {
            Weight::PowerLaw { alpha, beta, .. } => {
                (iv.a().is_finite() && *alpha <= -T::one()) || (iv.b().is_finite() && *beta <= -T::one())
            }
            _ => false,
        }
    }

    /// Multiplies the weight by `lambda > 0`.
    pub fn scaled(&self, lambda: T) -> Self {
        match self {
            Weight::PowerLaw { c, alpha, beta } => Weight::PowerLaw {
                c: *c * lambda,
                alpha: *alpha,
                beta: *beta,
            },
            Weight::PiecewiseConstant { breakpoints, values } => Weight::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| *v * lambda).collect(),
            },
            Weight::Tabulated { grid, values } => Weight::Tabulated {
                grid: grid.clone(),
                values: values.iter().map(|v| *v * lambda).collect(),
            },
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            Weight::PowerLaw { c, .. } => c.is_zero(),
            Weight::PiecewiseConstant { values, .. } | Weight::Tabulated { values, .. } => {
                values.iter().all(|v| v.is_zero())
            }
        }
    }

    /// `Some((c, alpha))` when the weight is `c·(x - a)^alpha` on a finite-left interval.
    pub fn left_monomial(&self, iv: &Interval<T>) -> Option<(T, T)> {
        match self {
            Weight::PowerLaw { c, alpha, beta } if iv.a().is_finite() && (beta.is_zero() || !iv.b().is_finite()) => {
                Some((*c, *alpha))
            }
            _ => None,
        }
    }

    /// Interior points of `(a, b)` where the weight is not smooth.
    pub fn kinks(&self, iv: &Interval<T>) -> Vec<T> {
        let pts: &[T] = match self {
            Weight::PowerLaw { .. } => &[],
            Weight::PiecewiseConstant { breakpoints, .. } => breakpoints,
            Weight::Tabulated { grid, .. } => grid,
        };
        pts.iter().copied().filter(|x| *x > iv.a() && *x < iv.b()).collect()
    }

    pub fn eval(&self, iv: &Interval<T>, at: Loc<T>) -> T {
        match self {
            Weight::PowerLaw { c, alpha, beta } => {
                let mut v = *c;
                if iv.a().is_finite() {
                    v = conv::mul(v, conv::pow(at.from_a, *alpha));
                }
                if iv.b().is_finite() {
                    v = conv::mul(v, conv::pow(at.to_b, *beta));
                }
                v
            }
            Weight::PiecewiseConstant { breakpoints, values } => {
                let i = breakpoints.partition_point(|b| *b <= at.x);
                values[i]
            }
            Weight::Tabulated { grid, values } => {
                let x = at.x;
                let n = grid.len();
                if x <= grid[0] {
                    return values[0];
                }
                if x >= grid[n - 1] {
                    return values[n - 1];
                }
                let i = grid.partition_point(|g| *g <= x) - 1;
                let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
                let (y0, y1) = (values[i], values[i + 1]);
                if values.iter().all(|v| *v > T::zero()) {
                    (y0.ln() * (T::one() - t) + y1.ln() * t).exp()
                } else {
                    y0 * (T::one() - t) + y1 * t
                }
            }
        }
    }

    pub fn eval_at(&self, iv: &Interval<T>, x: T) -> T {
        self.eval(iv, iv.loc(x))
    }
}

fn strictly_increasing<T: Real>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite()) && xs.windows(2).all(|w| w[0] < w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_uses_endpoint_distances() {
        let iv = Interval::new(0.0f64, 1.0).unwrap();
        let w = Weight::power_law(2.0, -0.5, 1.0);
        let at = Loc { x: 1e-300, from_a: 1e-300, to_b: 1.0 };
        assert!((w.eval(&iv, at) - 2.0e150).abs() / 2.0e150 < 1e-12);
        assert_eq!(w.eval_at(&iv, 0.0), f64::INFINITY);
        assert_eq!(w.eval_at(&iv, 1.0), 0.0);
    }

    #[test]
    fn power_law_on_half_line_drops_infinite_factor() {
        let iv = Interval::new(1.0f64, f64::INFINITY).unwrap();
        let w = Weight::power_law(1.0, -2.0, 5.0);
        assert!((w.eval_at(&iv, 3.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn piecewise_constant_lookup() {
        let w = Weight::piecewise_constant(vec![0.25, 0.5], vec![1.0, 0.0, 3.0]).unwrap();
        let iv = Interval::unit();
        assert_eq!(w.eval_at(&iv, 0.1), 1.0);
        assert_eq!(w.eval_at(&iv, 0.3), 0.0);
        assert_eq!(w.eval_at(&iv, 0.5), 3.0);
        assert_eq!(w.kinks(&iv), vec![0.25, 0.5]);
    }

    #[test]
    fn tabulated_interpolates_in_log_space() {
        let w = Weight::tabulated(vec![0.0, 1.0], vec![1.0, 4.0]).unwrap();
        let iv = Interval::<f64>::unit();
        assert!((w.eval_at(&iv, 0.5) - 2.0).abs() < 1e-14);
        let lin = Weight::tabulated(vec![0.0, 1.0], vec![0.0, 4.0]).unwrap();
        assert!((lin.eval_at(&iv, 0.5) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn validation_errors() {
        assert!(Weight::piecewise_constant(vec![0.5], vec![1.0]).is_err());
        assert!(Weight::piecewise_constant(vec![0.5, 0.4], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Weight::tabulated(vec![0.0], vec![1.0]).is_err());
        assert!(Weight::piecewise_constant(vec![0.5], vec![1.0, -1.0]).is_err());
        assert!(Weight::power_law(-1.0, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn integrability_flag() {
        let iv = Interval::unit();
        assert!(Weight::power_law(1.0, -1.0, 0.0).possibly_non_integrable(&iv));
        assert!(!Weight::power_law(1.0, -0.5, 0.0).possibly_non_integrable(&iv));
    }

    #[test]
    fn scaling_is_linear() {
        let iv = Interval::<f64>::unit();
        for w in [
            Weight::power_law(1.5, 0.3, -0.2),
            Weight::piecewise_constant(vec![0.5], vec![1.0, 2.0]).unwrap(),
            Weight::tabulated(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap(),
        ] {
            let s = w.scaled(10.0);
            let x = 0.37;
            assert!((s.eval_at(&iv, x) - 10.0 * w.eval_at(&iv, x)).abs() < 1e-12);
        }
    }
}
