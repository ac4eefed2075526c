use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::characterization::{Ladder, Resolution};
use crate::discretization::DiscretizingSequence;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::{Exponents, Weight};
use crate::oracle::ascent::ascend;
use crate::oracle::{OracleEstimate, TestFunction, DIVERGENCE};
use crate::scalar::{conv, lit, Real};

/// The two sequence inequalities a discretized problem splits into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    /// `(Σ 2^{-k} a_k^r B(x_{k-1}, x_k)^r)^{1/r} <= C ‖a‖_p`
    Bk,
    /// `(Σ 2^{-k} U_k^{r/q} (Σ_{j<=k} a_j V_p(x_{j-1}, x_j))^r)^{1/r} <= C ‖a‖_p`
    Vp,
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::Bk => "Bk",
            SequenceKind::Vp => "Vp",
        })
    }
}

impl FromStr for SequenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Bk" | "bk" => Ok(SequenceKind::Bk),
            "Vp" | "vp" => Ok(SequenceKind::Vp),
            _ => Err(Error::HypothesisViolated(format!("unknown sequence kind `{s}`"))),
        }
    }
}

/// Coefficients of the left-hand side: `lhs^r = Σ_k weight_k · (inner_k)^r`.
struct Problem<T> {
    kind: SequenceKind,
    p: T,
    r: T,
    /// `Bk`: `2^{-k} B_k^r`; `Vp`: `2^{-k} U_k^{r/q}` (zero where `U_k` is beyond the ladder).
    weight: Vec<T>,
    /// `V_p(x_{j-1}, x_j)` for `Vp`.
    vloc: Vec<T>,
}

impl<T: Real> Problem<T> {
    fn new(kind: SequenceKind, e: &Exponents<T>, lad: &Ladder<T>) -> Self {
        let (q, r) = (e.q, e.r);
        let n = lad.b.len();
        let weight = match kind {
            SequenceKind::Bk => (0..n).map(|j| conv::mul(lad.dyadic(j + 1), conv::pow(lad.b[j], r))).collect(),
            SequenceKind::Vp => (0..n)
                .map(|j| {
                    if j + 1 < lad.u.len() {
                        conv::mul(lad.dyadic(j + 1), conv::pow(lad.u[j + 1], r / q))
                    } else {
                        T::zero()
                    }
                })
                .collect(),
        };
        Self {
            kind,
            p: e.p,
            r,
            weight,
            vloc: lad.vloc.clone(),
        }
    }

    fn ratio(&self, a: &[T]) -> T {
        let mut s = T::zero();
        let mut partial = T::zero();
        for j in 0..a.len() {
            let inner = match self.kind {
                SequenceKind::Bk => a[j],
                SequenceKind::Vp => {
                    partial = partial + conv::mul(a[j], self.vloc[j]);
                    partial
                }
            };
            s = s + conv::mul(self.weight[j], conv::pow(inner, self.r));
        }
        let norm = a.iter().map(|x| conv::pow(*x, self.p)).fold(T::zero(), |x, y| x + y);
        conv::div(conv::pow(s, self.r.recip()), conv::pow(norm, self.p.recip()))
    }
}

/// The sequence ratio of `kind` at `a`, where `a[j]` belongs to the interval `(x_{N+j}, x_{N+j+1})`.
pub fn discrete_ratio<T: Real>(
    kind: SequenceKind,
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    ds: &DiscretizingSequence<T>,
    a: &[T],
) -> Result<ExtReal<T>> {
    let lad = Ladder::build(e, u, v, ds, &Resolution::default())?;
    let prob = Problem::new(kind, e, &lad);
    if a.len() != prob.weight.len() {
        return Err(Error::HypothesisViolated(format!(
            "expected {} coefficients, got {}",
            prob.weight.len(),
            a.len()
        )));
    }
    Ok(ExtReal::from_raw(prob.ratio(a)))
}

/// Lower bound for the best constant of the sequence inequality `kind` by coordinate ascent
/// from unit-vector and geometric starts.
///
/// The maximizer is reported as a step function with value `a_k` on `(x_{k-1}, x_k)`.
pub fn discrete_best_constant<T: Real>(
    kind: SequenceKind,
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    ds: &DiscretizingSequence<T>,
    budget: usize,
) -> Result<OracleEstimate<T>> {
    let lad = Ladder::build(e, u, v, ds, &Resolution::default())?;
    let prob = Problem::new(kind, e, &lad);
    let n = prob.weight.len();
    let step = |a: &[T]| TestFunction::PiecewiseConstant {
        grid: lad.x.clone(),
        values: a.to_vec(),
    };
    if n == 0 {
        return Ok(OracleEstimate {
            value: ExtReal::zero(),
            argmax: step(&[]),
            evaluations: 0,
            grid_size: 0,
            structured: ExtReal::zero(),
        });
    }
    let mut inits: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut a = vec![T::zero(); n];
            a[j] = T::one();
            a
        })
        .collect();
    for rho in [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.9, 1.0, 1.1] {
        inits.push((0..n).map(|j| lit::<T>(rho).powi(j as i32)).collect());
    }
    let structured = inits
        .iter()
        .map(|a| prob.ratio(a))
        .fold(T::zero(), T::max);
    let share = (budget / inits.len()).max(1);
    let runs: Vec<(T, Vec<T>, usize)> = inits
        .into_par_iter()
        .map(|a0| {
            let a = ascend(a0, |a| prob.ratio(a), share);
            (a.value, a.x, a.evals)
        })
        .collect();
    let mut evaluations = 0;
    let mut best = (T::zero(), vec![T::zero(); n]);
    for (value, a, k) in runs {
        evaluations += k;
        if value > best.0 {
            best = (value, a);
        }
    }
    let cap = lit::<T>(DIVERGENCE);
    let clip = |v: T| if v > cap { ExtReal::infinity() } else { ExtReal::from_raw(v) };
    Ok(OracleEstimate {
        value: clip(best.0),
        argmax: step(&best.1),
        evaluations,
        grid_size: n,
        structured: clip(structured),
    })
}
