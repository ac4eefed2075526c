//! Both sides of the discretization equivalences, evaluated for concrete inputs.

use std::fmt;
use std::str::FromStr;

use crate::discretization::DiscretizingSequence;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::ess_sup::ess_sup_loc;
use crate::measure::{integrate_fn, Interval, Quadrature, Weight};
use crate::mesh::{Cumulative, Mesh};
use crate::scalar::{conv, int, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaKind {
    SupSum,
    SumSum,
    SumSup,
    DecSupSum,
    DecSumSum,
    DecSumSup,
    ThreeSup,
    ThreeSum,
    IntEquiv,
    SupEquiv,
}

impl LemmaKind {
    pub const ALL: [LemmaKind; 10] = [
        LemmaKind::SupSum,
        LemmaKind::SumSum,
        LemmaKind::SumSup,
        LemmaKind::DecSupSum,
        LemmaKind::DecSumSum,
        LemmaKind::DecSumSup,
        LemmaKind::ThreeSup,
        LemmaKind::ThreeSum,
        LemmaKind::IntEquiv,
        LemmaKind::SupEquiv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaKind::SupSum => "sup-sum",
            LemmaKind::SumSum => "sum-sum",
            LemmaKind::SumSup => "sum-sup",
            LemmaKind::DecSupSum => "dec-sup-sum",
            LemmaKind::DecSumSum => "dec-sum-sum",
            LemmaKind::DecSumSup => "dec-sum-sup",
            LemmaKind::ThreeSup => "3-sup",
            LemmaKind::ThreeSum => "3-sum",
            LemmaKind::IntEquiv => "int-equiv",
            LemmaKind::SupEquiv => "sup-equiv",
        }
    }
}

impl fmt::Display for LemmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::HypothesisViolated(format!("unknown lemma kind `{s}`")))
    }
}

/// A non-negative sequence `{a_k}` indexed from `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonNegSequence<T> {
    pub start: i64,
    pub values: Vec<T>,
}

impl<T: Real> NonNegSequence<T> {
    pub fn new(start: i64, values: Vec<T>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < T::zero()) {
            return Err(Error::HypothesisViolated(format!("sequence value {v} is negative")));
        }
        Ok(Self { start, values })
    }

    pub fn zeros(start: i64, len: usize) -> Self {
        Self {
            start,
            values: vec![T::zero(); len],
        }
    }

    pub fn unit(start: i64, len: usize, at: usize) -> Self {
        let mut s = Self::zeros(start, len);
        s.values[at] = T::one();
        s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The objects each lemma quantifies over.
pub enum LemmaInput<'a, T> {
    /// `sup-sum`, `sum-sum`, `sum-sup`: `τ_k` and `a_k` over the same indices.
    Sequence {
        tau: &'a [T],
        a: &'a NonNegSequence<T>,
        alpha: T,
    },
    /// `dec-*`: `points = x_{n-1}, x_n, …, x_K` (one more than `tau`).
    /// `3-*`: `points = x_n, …, x_K` and `sigma` non-decreasing, both as long as `tau`.
    Partition {
        tau: &'a [T],
        points: &'a [T],
        g: &'a Weight<T>,
        iv: &'a Interval<T>,
        alpha: T,
        sigma: &'a [T],
    },
    /// `int-equiv`, `sup-equiv`: a discretizing sequence, a start index `n` and a
    /// non-decreasing `h`.
    Discretized {
        ds: &'a DiscretizingSequence<T>,
        n: i64,
        alpha: T,
        h: &'a (dyn Fn(T) -> T + Sync),
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaPair<T> {
    pub lhs: ExtReal<T>,
    pub rhs: ExtReal<T>,
    /// Last retained term relative to the truncated sum (or supremum).
    pub tail_ratio: T,
}

impl<T: Real> LemmaPair<T> {
    pub fn ratio(&self) -> ExtReal<T> {
        self.lhs / self.rhs
    }
}

fn check_geometric<T: Real>(tau: &[T]) -> Result<()> {
    if tau.is_empty() {
        return Err(Error::HypothesisViolated("empty sequence".into()));
    }
    if tau.iter().any(|t| !(t.is_finite() && *t > T::zero())) {
        return Err(Error::HypothesisViolated("tau must be positive and finite".into()));
    }
    let sup = tau.windows(2).map(|w| w[1] / w[0]).fold(T::zero(), T::max);
    if sup >= T::one() {
        return Err(Error::NotGeometric {
            ratio: sup.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn check_alpha<T: Real>(alpha: T, allow_zero: bool) -> Result<()> {
    let ok = alpha.is_finite() && (alpha > T::zero() || (allow_zero && alpha.is_zero()));
    if ok {
        Ok(())
    } else {
        Err(Error::HypothesisViolated(format!("alpha = {alpha} is out of range")))
    }
}

fn wrong_input<T>(kind: LemmaKind) -> Result<T> {
    Err(Error::HypothesisViolated(format!("{kind} was given the wrong kind of input")))
}

/// Sum and last-term ratio.
fn sum_terms<T: Real>(terms: impl Iterator<Item = T>) -> (T, T) {
    let mut s = T::zero();
    let mut last = T::zero();
    for t in terms {
        s = s + t;
        last = t;
    }
    (s, conv::div(last, s))
}

fn max_terms<T: Real>(terms: impl Iterator<Item = T>) -> (T, T) {
    let mut m = T::zero();
    let mut last = T::zero();
    for t in terms {
        m = m.max(t);
        last = t;
    }
    (m, conv::div(last, m))
}

fn pair<T: Real>(lhs: (T, T), rhs: (T, T)) -> LemmaPair<T> {
    LemmaPair {
        lhs: ExtReal::from_raw(lhs.0),
        rhs: ExtReal::from_raw(rhs.0),
        tail_ratio: lhs.1.max(rhs.1),
    }
}

fn running<T: Real>(a: &[T], op: impl Fn(T, T) -> T) -> Vec<T> {
    let mut acc = T::zero();
    a.iter()
        .map(|x| {
            acc = op(acc, *x);
            acc
        })
        .collect()
}

/// Both sides of the named equivalence.
pub fn lemma_pair<T: Real>(kind: LemmaKind, input: &LemmaInput<'_, T>) -> Result<LemmaPair<T>> {
    use LemmaKind::*;
    match (kind, input) {
        (SupSum | SumSum | SumSup, LemmaInput::Sequence { tau, a, alpha }) => {
            check_geometric(tau)?;
            check_alpha(*alpha, false)?;
            if a.len() != tau.len() {
                return Err(Error::HypothesisViolated("tau and a must have equal length".into()));
            }
            Ok(sequence_pair(kind, tau, &a.values, *alpha))
        }
        (DecSupSum | DecSumSum | DecSumSup, LemmaInput::Partition { tau, points, g, iv, alpha, .. }) => {
            check_geometric(tau)?;
            check_alpha(*alpha, false)?;
            check_points(points, tau.len() + 1, iv)?;
            dec_pair(kind, tau, points, g, iv, *alpha)
        }
        (ThreeSup | ThreeSum, LemmaInput::Partition { tau, points, g, iv, alpha, sigma }) => {
            check_geometric(tau)?;
            check_alpha(*alpha, false)?;
            check_points(points, tau.len(), iv)?;
            if sigma.len() != tau.len()
                || sigma.iter().any(|s| !(s.is_finite() && *s > T::zero()))
                || sigma.windows(2).any(|w| w[1] < w[0])
            {
                return Err(Error::HypothesisViolated("sigma must be positive, non-decreasing and as long as tau".into()));
            }
            three_pair(kind, tau, points, g, iv, *alpha, sigma)
        }
        (IntEquiv | SupEquiv, LemmaInput::Discretized { ds, n, alpha, h }) => {
            check_alpha(*alpha, true)?;
            if *n < ds.first_index() || *n >= ds.last_index() {
                return Err(Error::HypothesisViolated(format!(
                    "start index {n} outside [{}, {})",
                    ds.first_index(),
                    ds.last_index()
                )));
            }
            discretized_pair(kind, ds, *n, *alpha, *h)
        }
        _ => wrong_input(kind),
    }
}

fn check_points<T: Real>(points: &[T], len: usize, iv: &Interval<T>) -> Result<()> {
    if points.len() != len {
        return Err(Error::HypothesisViolated(format!("expected {len} points, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) || points.iter().any(|x| !iv.contains(*x)) {
        return Err(Error::HypothesisViolated("points must be strictly increasing inside the interval".into()));
    }
    Ok(())
}

fn sequence_pair<T: Real>(kind: LemmaKind, tau: &[T], a: &[T], alpha: T) -> LemmaPair<T> {
    let sums = running(a, |s, x| s + x);
    let maxes = running(a, T::max);
    let n = tau.len();
    match kind {
        LemmaKind::SupSum => pair(
            max_terms((0..n).map(|k| conv::mul(tau[k], sums[k]))),
            max_terms((0..n).map(|k| conv::mul(tau[k], a[k]))),
        ),
        LemmaKind::SumSum => pair(
            sum_terms((0..n).map(|k| conv::mul(tau[k], conv::pow(sums[k], alpha)))),
            sum_terms((0..n).map(|k| conv::mul(tau[k], conv::pow(a[k], alpha)))),
        ),
        _ => pair(
            sum_terms((0..n).map(|k| conv::mul(tau[k], maxes[k]))),
            sum_terms((0..n).map(|k| conv::mul(tau[k], a[k]))),
        ),
    }
}

fn piece<T: Real>(g: &Weight<T>, iv: &Interval<T>, quad: &Quadrature<T>, x: T, y: T) -> Result<T> {
    integrate_fn(quad, iv, x, y, &g.kinks(iv), |l| g.eval(iv, l))
}

fn dec_pair<T: Real>(
    kind: LemmaKind,
    tau: &[T],
    points: &[T],
    g: &Weight<T>,
    iv: &Interval<T>,
    alpha: T,
) -> Result<LemmaPair<T>> {
    let quad = Quadrature::with_tol(lit(1e-10));
    let n = tau.len();
    let start = points[0];
    if kind == LemmaKind::DecSumSup {
        let sup = |x: T, y: T| ess_sup_loc(iv, x, y, |l| g.eval(iv, l)).value;
        let whole: Vec<T> = (0..n).map(|k| sup(start, points[k + 1])).collect();
        let local: Vec<T> = (0..n).map(|k| sup(points[k], points[k + 1])).collect();
        return Ok(pair(
            sum_terms((0..n).map(|k| conv::mul(tau[k], whole[k]))),
            sum_terms((0..n).map(|k| conv::mul(tau[k], local[k]))),
        ));
    }
    let mut whole = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    for k in 0..n {
        whole.push(piece(g, iv, &quad, start, points[k + 1])?);
        local.push(piece(g, iv, &quad, points[k], points[k + 1])?);
    }
    Ok(if kind == LemmaKind::DecSupSum {
        pair(
            max_terms((0..n).map(|k| conv::mul(tau[k], whole[k]))),
            max_terms((0..n).map(|k| conv::mul(tau[k], local[k]))),
        )
    } else {
        pair(
            sum_terms((0..n).map(|k| conv::mul(tau[k], conv::pow(whole[k], alpha)))),
            sum_terms((0..n).map(|k| conv::mul(tau[k], conv::pow(local[k], alpha)))),
        )
    })
}

fn three_pair<T: Real>(
    kind: LemmaKind,
    tau: &[T],
    points: &[T],
    g: &Weight<T>,
    iv: &Interval<T>,
    alpha: T,
    sigma: &[T],
) -> Result<LemmaPair<T>> {
    let quad = Quadrature::with_tol(lit(1e-10));
    let n = tau.len();
    let mut cells = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        cells.push(piece(g, iv, &quad, points[k - 1], points[k])?);
    }
    let cum = Cumulative::new(&cells);
    let lhs_terms = (1..n).map(|k| {
        let inner = (0..k)
            .map(|i| conv::mul(conv::pow(cum.seg(i, k), alpha), sigma[i]))
            .fold(T::zero(), T::max);
        conv::mul(tau[k], inner)
    });
    let rhs_terms = (1..n).map(|k| conv::mul(tau[k], conv::mul(conv::pow(cells[k - 1], alpha), sigma[k - 1])));
    Ok(if kind == LemmaKind::ThreeSup {
        pair(max_terms(lhs_terms), max_terms(rhs_terms))
    } else {
        pair(sum_terms(lhs_terms), sum_terms(rhs_terms))
    })
}

fn discretized_pair<T: Real>(
    kind: LemmaKind,
    ds: &DiscretizingSequence<T>,
    n: i64,
    alpha: T,
    h: &(dyn Fn(T) -> T + Sync),
) -> Result<LemmaPair<T>> {
    let iv = *ds.interval();
    let w = ds.weight();
    let x_n = ds.point(n).expect("index checked by caller");
    let interior: Vec<T> = ds.points().iter().copied().filter(|x| *x > x_n).collect();
    let mut extra = interior.clone();
    extra.extend(w.kinks(&iv));
    let mesh = Mesh::new(iv, x_n, iv.b(), 2048, &extra);
    let quad = Quadrature::with_tol(lit(1e-10));
    let moments = mesh.moments(w, &quad)?;
    let cum = Cumulative::new(&moments.masses());
    let two = lit::<T>(2.0);
    let ks = (n + 1)..=ds.last_index();
    let hx = |k: i64| h(ds.point(k).expect("index in range"));
    if kind == LemmaKind::IntEquiv {
        let g: Vec<T> = (0..mesh.nodes.len())
            .map(|i| conv::mul(conv::pow(cum.to_end(i), alpha), h(mesh.nodes[i])))
            .collect();
        let lhs = moments.trapezoid(&g, 0, mesh.cells());
        let rhs = sum_terms(ks.map(|k| conv::mul(two.powf(int::<T>(-k) * (alpha + T::one())), hx(k))));
        Ok(pair((lhs, T::zero()), rhs))
    } else {
        let lhs = (1..mesh.nodes.len())
            .map(|i| conv::mul(conv::pow(cum.to_end(i), alpha), h(mesh.nodes[i])))
            .fold(T::zero(), T::max);
        let rhs = max_terms(ks.map(|k| conv::mul(two.powf(int::<T>(-k) * alpha), hx(k))));
        Ok(pair((lhs, T::zero()), rhs))
    }
}
