//! Lower bounds for best constants by direct evaluation of the functionals.
//!
//! Every estimate is a ratio that was actually evaluated for a concrete test function, so
//! [`OracleEstimate::value`] never exceeds the true best constant beyond discretization error.

mod ascent;
mod frame;
mod search;
mod sequence;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::ess_sup::ess_sup_loc;
use crate::measure::{Exponents, Interval, MonotoneExponents, Weight};
use crate::scalar::{conv, lit, Real};

use frame::Frame;

pub use search::{best_constant_search, best_constant_search_with, SearchOptions};
pub use sequence::{discrete_best_constant, discrete_ratio, SequenceKind};

/// Cells of the evaluation grid used by the single-shot functionals.
pub const EVAL_GRID: usize = 2048;

/// Ratios above this are reported as `+inf`.
pub const DIVERGENCE: f64 = 1e12;

/// A non-negative test function on `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction<T> {
    /// `values[i]` on `[grid[i], grid[i+1])`, zero outside `[grid[0], grid[n])`.
    PiecewiseConstant { grid: Vec<T>, values: Vec<T> },
    /// `height` on `[center - width/2, center + width/2]`.
    Spike { center: T, width: T, height: T },
    /// `(x - a)^exponent`; needs a finite left endpoint.
    PowerProfile { exponent: T },
    /// `v^{-1/(p-1)}` on `(start, cutoff)` for `p > 1`. For `p = 1` a narrow spike where `1/v`
    /// is largest on `(start, cutoff)`.
    DualCandidate { start: T, cutoff: T },
}

impl<T: Real> TestFunction<T> {
    pub fn constant(iv: &Interval<T>, c: T) -> Self {
        TestFunction::PiecewiseConstant {
            grid: vec![iv.a(), iv.b()],
            values: vec![c],
        }
    }

    /// Interior points where the function jumps.
    fn breakpoints(&self, iv: &Interval<T>) -> Vec<T> {
        let pts = match self {
            TestFunction::PiecewiseConstant { grid, .. } => grid.clone(),
            TestFunction::Spike { center, width, .. } => {
                let h = *width / lit(2.0);
                vec![*center - h, *center + h]
            }
            TestFunction::PowerProfile { .. } => Vec::new(),
            TestFunction::DualCandidate { start, cutoff } => vec![*start, *cutoff],
        };
        pts.into_iter().filter(|x| *x > iv.a() && *x < iv.b()).collect()
    }

    fn validate(&self, iv: &Interval<T>) -> Result<()> {
        let bad = |m: &str| Err(Error::HypothesisViolated(m.to_string()));
        match self {
            TestFunction::PiecewiseConstant { grid, values } => {
                if grid.len() != values.len() + 1 || grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("piecewise constant test function needs an increasing grid one longer than its values");
                }
                if values.iter().any(|v| !(*v >= T::zero()) || v.is_infinite()) {
                    return bad("test function values must be finite and non-negative");
                }
            }
            TestFunction::Spike { width, height, .. } => {
                if !(*width > T::zero()) || !(*height >= T::zero()) || !width.is_finite() || !height.is_finite() {
                    return bad("spike needs a positive width and a non-negative height");
                }
            }
            TestFunction::PowerProfile { exponent } => {
                if !iv.a().is_finite() || !exponent.is_finite() {
                    return bad("power profile needs a finite left endpoint and a finite exponent");
                }
            }
            TestFunction::DualCandidate { start, cutoff } => {
                if !(start < cutoff) {
                    return bad("dual candidate needs start < cutoff");
                }
            }
        }
        Ok(())
    }

    /// Replaces the `p = 1` dual candidate by the spike it stands for.
    fn resolve(&self, v: &Weight<T>, iv: &Interval<T>, p: T) -> Self {
        match self {
            TestFunction::DualCandidate { start, cutoff } if p == T::one() => {
                let (s, c) = (start.max(iv.a()), cutoff.min(iv.b()));
                let at = ess_sup_loc(iv, s, c, |l| conv::div(T::one(), v.eval(iv, l))).arg;
                let mut width = lit::<T>(1e-6);
                if (c - s).is_finite() {
                    width = width * (c - s);
                }
                let lo = (at - width / lit(2.0)).max(s);
                let hi = (lo + width).min(c);
                TestFunction::Spike {
                    center: (lo + hi) / lit(2.0),
                    width: hi - lo,
                    height: T::one(),
                }
            }
            other => other.clone(),
        }
    }

    /// Value on cell `k`, for kinds that are constant between their breakpoints.
    fn cell_value(&self, frame: &Frame<T>, k: usize) -> T {
        let mid = frame.iv.from_param((frame.mesh.param(k) + frame.mesh.param(k + 1)) / lit(2.0));
        match self {
            TestFunction::PiecewiseConstant { grid, values } => {
                if mid < grid[0] || mid >= grid[grid.len() - 1] {
                    T::zero()
                } else {
                    values[grid.partition_point(|g| *g <= mid) - 1]
                }
            }
            TestFunction::Spike { center, width, height } => {
                let h = *width / lit(2.0);
                if mid >= *center - h && mid <= *center + h {
                    *height
                } else {
                    T::zero()
                }
            }
            _ => unreachable!("not a step function"),
        }
    }

    /// `(∫_cell f, ∫_cell f^p v)` for every cell of the frame.
    fn cell_data(&self, frame: &Frame<T>, v: &Weight<T>, p: T) -> Result<(Vec<T>, Vec<T>)> {
        let iv = frame.iv;
        let m = frame.cells();
        match self {
            TestFunction::PiecewiseConstant { .. } | TestFunction::Spike { .. } => {
                let c: Vec<T> = (0..m).map(|k| self.cell_value(frame, k)).collect();
                let d = (0..m).map(|k| conv::mul(c[k], frame.widths[k])).collect();
                let rho = (0..m)
                    .map(|k| {
                        if frame.widths[k].is_zero() {
                            T::zero()
                        } else {
                            conv::mul(conv::pow(c[k], p), frame.vmass[k])
                        }
                    })
                    .collect();
                Ok((d, rho))
            }
            TestFunction::PowerProfile { exponent } => {
                let g = *exponent;
                let e1 = g + T::one();
                let prim = |x: T| {
                    let t = (x - iv.a()).max(T::zero());
                    if e1 > T::zero() {
                        conv::pow(t, e1) / e1
                    } else if t.is_zero() {
                        T::zero()
                    } else {
                        T::infinity()
                    }
                };
                let nodes = &frame.mesh.nodes;
                let d = (0..m)
                    .map(|k| {
                        if frame.widths[k].is_zero() {
                            T::zero()
                        } else if e1 <= T::zero() && k == 0 {
                            T::infinity()
                        } else {
                            (prim(nodes[k + 1]) - prim(nodes[k])).max(T::zero())
                        }
                    })
                    .collect();
                let gp = g * p;
                let mut rho = frame
                    .mesh
                    .masses_fn(&frame.quad, |l| conv::mul(conv::pow(l.from_a, gp), v.eval(&iv, l)))?;
                for (r, h) in rho.iter_mut().zip(&frame.widths) {
                    if h.is_zero() {
                        *r = T::zero();
                    }
                }
                Ok((d, rho))
            }
            TestFunction::DualCandidate { start, cutoff } => {
                let dm = frame.dual_masses(v, p)?;
                let nodes = &frame.mesh.nodes;
                let d: Vec<T> = (0..m)
                    .map(|k| {
                        if nodes[k] >= *start && nodes[k + 1] <= *cutoff {
                            dm[k]
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                Ok((d.clone(), d))
            }
        }
    }
}

/// Best ratio found by a search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate<T> {
    pub value: ExtReal<T>,
    pub argmax: TestFunction<T>,
    pub evaluations: usize,
    pub grid_size: usize,
    /// Best ratio among the structured candidates alone (dual windows, spikes, power profiles).
    pub structured: ExtReal<T>,
}

fn prepare<T: Real>(
    f: &TestFunction<T>,
    iv: &Interval<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    p: T,
) -> Result<(Frame<T>, Vec<T>, Vec<T>)> {
    f.validate(iv)?;
    let f = f.resolve(v, iv, p);
    let frame = Frame::build(iv, u, v, w, EVAL_GRID, &f.breakpoints(iv))?;
    let (d, rho) = f.cell_data(&frame, v, p)?;
    Ok((frame, d, rho))
}

fn needs_v<T: Real>(f: &TestFunction<T>) -> Result<()> {
    if matches!(f, TestFunction::DualCandidate { .. }) {
        return Err(Error::HypothesisViolated(
            "a dual candidate depends on v; evaluate it with `evaluate`".into(),
        ));
    }
    Ok(())
}

/// `(∫_a^b (∫_a^x (∫_a^t f)^q u)^{r/q} w)^{1/r}`.
pub fn lhs_iterated<T: Real>(
    f: &TestFunction<T>,
    e: &Exponents<T>,
    u: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
) -> Result<ExtReal<T>> {
    needs_v(f)?;
    let one = Weight::constant(T::one());
    let (frame, d, _) = prepare(f, iv, u, &one, w, e.p)?;
    Ok(ExtReal::from_raw(frame.lhs_iterated(&d, e.q, e.r)))
}

/// Both sides of the iterated inequality and their ratio for one test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub lhs: ExtReal<T>,
    pub rhs: ExtReal<T>,
    pub ratio: ExtReal<T>,
}

pub fn evaluate<T: Real>(
    f: &TestFunction<T>,
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
) -> Result<Evaluation<T>> {
    let (frame, d, rho) = prepare(f, iv, u, v, w, e.p)?;
    let lhs = ExtReal::from_raw(frame.lhs_iterated(&d, e.q, e.r));
    let rhs = ExtReal::from_raw(conv::pow(rho.into_iter().fold(T::zero(), |a, b| a + b), e.p.recip()));
    Ok(Evaluation { lhs, rhs, ratio: lhs / rhs })
}

/// `(∫_a^b f^p v)^{1/p}`.
pub fn rhs_norm<T: Real>(f: &TestFunction<T>, p: T, v: &Weight<T>, iv: &Interval<T>) -> Result<ExtReal<T>> {
    let one = Weight::constant(T::one());
    let (_, _, rho) = prepare(f, iv, &one, v, &one, p)?;
    let s = rho.into_iter().fold(T::zero(), |a, b| a + b);
    Ok(ExtReal::from_raw(conv::pow(s, p.recip())))
}

/// `(∫_a^b (∫_a^x (∫_s^x u) f(s) ds)^r w)^{1/r}`: the `q = 1` left-hand side in kernel form.
pub fn lhs_kernel_q1<T: Real>(
    f: &TestFunction<T>,
    u: &Weight<T>,
    w: &Weight<T>,
    r: T,
    iv: &Interval<T>,
) -> Result<ExtReal<T>> {
    let one = Weight::constant(T::one());
    needs_v(f)?;
    let (frame, d, _) = prepare(f, iv, u, &one, w, T::one())?;
    Ok(ExtReal::from_raw(frame.lhs_kernel_q1(&d, r)))
}

/// Ratios of the monotone inequality at `f = (∫_a^x h)^{1/p}`, with the right-hand side taken
/// once as `∫ f^p v` and once as `∫ h(s) (∫_s^b v) ds`.
pub fn monotone_pair_check<T: Real>(
    h: &TestFunction<T>,
    e: &MonotoneExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
) -> Result<(ExtReal<T>, ExtReal<T>)> {
    needs_v(h)?;
    let (frame, d, _) = prepare(h, iv, u, v, w, T::one())?;
    let (p, q) = (e.p, e.q);
    let n = frame.mesh.nodes.len();
    let mut big_h = Vec::with_capacity(n);
    let mut s = T::zero();
    big_h.push(s);
    for x in &d {
        s = s + *x;
        big_h.push(s);
    }
    let f: Vec<T> = big_h.iter().map(|x| conv::pow(*x, p.recip())).collect();
    let inner = frame.u.running(&f);
    let g: Vec<T> = inner.iter().map(|x| conv::pow(*x, q)).collect();
    let lhs = conv::pow(frame.w.trapezoid(&g, 0, frame.cells()), q.recip());
    let rhs1 = frame.v.trapezoid(&big_h, 0, frame.cells());
    let vcum = crate::mesh::Cumulative::new(&frame.vmass);
    let rhs2 = (0..frame.cells())
        .map(|k| conv::mul(d[k], vcum.to_end(k + 1) + frame.v.right[k]))
        .fold(T::zero(), |a, b| a + b);
    let ratio = |rhs: T| ExtReal::from_raw(conv::div(lhs, conv::pow(rhs, p.recip())));
    Ok((ratio(rhs1), ratio(rhs2)))
}
