use rayon::prelude::*;

use crate::characterization::{
    classify, local_on_mesh, ConditionReport, ConstantName, Regime, Resolution, TailDiagnostic,
};
use crate::discretization::DiscretizingSequence;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::measure::ess_sup::ess_sup_loc;
use crate::measure::{dual_mass, integrate_fn, Exponents, HardyExponents, Quadrature, Weight};
use crate::scalar::{conv, int, lit, Real};

const TAIL_LIMIT: f64 = 0.1;

/// Discrete characterization over a discretizing sequence of `w`: the 𝒜 constant of the
/// regime plus ℬ₁ (`p <= r`) or ℬ₂ (`r < p`).
///
/// Sums run over the available indices only. A sum with more than one term whose last term
/// exceeds 10% of the total fails with [`Error::TruncationDominated`].
pub fn discrete_constants<T: Real>(
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    ds: &DiscretizingSequence<T>,
) -> Result<ConditionReport<T>> {
    discrete_constants_with(e, u, v, ds, &Resolution::default())
}

/// Per-interval data of a sequence: `B(x_{k-1}, x_k)`, `U_k` and `V_p(a, x_k)`.
pub(crate) struct Ladder<T> {
    /// Index of `x[0]`.
    pub first: i64,
    pub x: Vec<T>,
    /// `b[j] = B(x[j], x[j+1])`.
    pub b: Vec<T>,
    /// `u[j] = ∫_{x[j]}^{x[j+1]} u`.
    pub u: Vec<T>,
    /// `vp[j] = V_p(a, x[j])`.
    pub vp: Vec<T>,
    /// `vloc[j] = V_p(x[j], x[j+1])`.
    pub vloc: Vec<T>,
}

impl<T: Real> Ladder<T> {
    pub fn build(e: &Exponents<T>, u: &Weight<T>, v: &Weight<T>, ds: &DiscretizingSequence<T>, res: &Resolution<T>) -> Result<Self> {
        u.validate()?;
        v.validate()?;
        let iv = *ds.interval();
        let quad = Quadrature::with_tol(res.tol);
        let x = ds.points().to_vec();
        let he = HardyExponents::from(*e);
        let b: Result<Vec<T>> = x
            .par_windows(2)
            .map(|s| local_on_mesh(&he, u, v, &iv, s[0], s[1], res.local_grid, res.refine, &quad))
            .collect();
        let ukinks = u.kinks(&iv);
        let um: Result<Vec<T>> = x
            .par_windows(2)
            .map(|s| integrate_fn(&quad, &iv, s[0], s[1], &ukinks, |l| u.eval(&iv, l)))
            .collect();
        // V_p over [a, x_0] and then over each interval.
        let mut cuts = vec![iv.a()];
        cuts.extend(x.iter().copied());
        let p = e.p;
        let pieces: Result<Vec<T>> = cuts
            .par_windows(2)
            .map(|s| {
                if p == T::one() {
                    if s[0] >= s[1] {
                        return Ok(T::zero());
                    }
                    Ok(ess_sup_loc(&iv, s[0], s[1], |l| conv::div(T::one(), v.eval(&iv, l))).value)
                } else {
                    dual_mass(v, &iv, p, s[0], s[1], &quad)
                }
            })
            .collect();
        let pieces = pieces?;
        let (vp, vloc) = if p == T::one() {
            let mut m = T::zero();
            let vp = pieces
                .iter()
                .map(|s| {
                    m = m.max(*s);
                    m
                })
                .collect();
            (vp, pieces[1..].to_vec())
        } else {
            let ex = (p - T::one()) / p;
            let mut m = T::zero();
            let vp = pieces
                .iter()
                .map(|s| {
                    m = m + *s;
                    conv::pow(m, ex)
                })
                .collect();
            (vp, pieces[1..].iter().map(|s| conv::pow(*s, ex)).collect())
        };
        Ok(Self {
            first: ds.first_index(),
            x,
            b: b?,
            u: um?,
            vp,
            vloc,
        })
    }

    /// `2^{-k}` for the index of `x[j]`.
    pub fn dyadic(&self, j: usize) -> T {
        lit::<T>(2.0).powf(-int::<T>(self.first + j as i64))
    }
}

/// A truncated sum or supremum with its last-term ratio.
struct Reduced<T> {
    value: T,
    ratio: T,
    terms: usize,
}

impl<T: Real> Reduced<T> {
    fn new(value: T, last: T, terms: usize) -> Self {
        Self {
            value,
            ratio: conv::div(last, value),
            terms,
        }
    }
}

fn sum_of<T: Real>(terms: &[T]) -> Reduced<T> {
    let s = terms.iter().fold(T::zero(), |s, t| s + *t);
    Reduced::new(s, terms.last().copied().unwrap_or(T::zero()), terms.len())
}

fn sup_of<T: Real>(terms: &[T]) -> Reduced<T> {
    let m = terms.iter().fold(T::zero(), |s, t| s.max(*t));
    Reduced::new(m, terms.last().copied().unwrap_or(T::zero()), terms.len())
}

fn guard<T: Real>(name: ConstantName, r: &Reduced<T>) -> Result<()> {
    let ratio = r.ratio;
    if r.terms > 1 && r.value.is_finite() && ratio > lit(TAIL_LIMIT) {
        return Err(Error::TruncationDominated {
            name: name.as_str().to_string(),
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// `2^{-k/r} B(x_{k-1}, x_k)` for `k` past the first index.
pub(crate) fn a_terms<T: Real>(lad: &Ladder<T>, r: T) -> Vec<T> {
    (0..lad.b.len())
        .map(|j| conv::mul(lad.dyadic(j + 1).powf(r.recip()), lad.b[j]))
        .collect()
}

/// Suffix sums `Σ_{i >= j} 2^{-i} U_i^{r/q}` over the exact terms.
fn u_tails<T: Real>(lad: &Ladder<T>, q: T, r: T) -> (Vec<T>, Vec<T>) {
    let n = lad.u.len();
    let terms: Vec<T> = (0..n).map(|j| conv::mul(lad.dyadic(j), conv::pow(lad.u[j], r / q))).collect();
    let mut tails = vec![T::zero(); n];
    let mut s = T::zero();
    for j in (0..n).rev() {
        s = s + terms[j];
        tails[j] = s;
    }
    (terms, tails)
}

pub fn discrete_constants_with<T: Real>(
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    ds: &DiscretizingSequence<T>,
    res: &Resolution<T>,
) -> Result<ConditionReport<T>> {
    use ConstantName::*;
    let (p, q, r) = (e.p, e.q, e.r);
    let regime = classify(e);
    let lad = Ladder::build(e, u, v, ds, res)?;
    let at = a_terms(&lad, r);
    let (a_name, a) = match regime {
        Regime::I => (A1, sup_of(&at)),
        Regime::III => (A3, sup_of(&at)),
        Regime::II | Regime::IV => {
            let name = if regime == Regime::II { A2 } else { A4 };
            let ex = p * r / (p - r);
            let powed: Vec<T> = at.iter().map(|t| conv::pow(*t, ex)).collect();
            let s = sum_of(&powed);
            guard(name, &s)?;
            let value = conv::pow(s.value, ex.recip());
            (name, Reduced { value, ..s })
        }
    };
    let (terms, tails) = u_tails(&lad, q, r);
    let last = terms.last().copied().unwrap_or(T::zero());
    let (b_name, b) = if p <= r {
        let vals: Vec<T> = (0..tails.len())
            .map(|j| conv::mul(conv::pow(tails[j], r.recip()), lad.vp[j]))
            .collect();
        let mut best = (T::zero(), 0);
        for (j, x) in vals.iter().enumerate() {
            if *x > best.0 {
                best = (*x, j);
            }
        }
        let inner = Reduced::new(tails.get(best.1).copied().unwrap_or(T::zero()), last, tails.len() - best.1);
        guard(B1, &inner)?;
        (B1, Reduced { value: best.0, ..inner })
    } else {
        let (e1, e2) = (r / (p - r), p * r / (p - r));
        let vals: Vec<T> = (0..tails.len())
            .map(|j| conv::mul(conv::mul(terms[j], conv::pow(tails[j], e1)), conv::pow(lad.vp[j], e2)))
            .collect();
        let inner = sum_of(&terms);
        guard(B2, &inner)?;
        let s = sum_of(&vals);
        guard(B2, &s)?;
        let value = conv::pow(s.value, e2.recip());
        (B2, Reduced { value, ratio: s.ratio.max(inner.ratio), ..s })
    };
    let mut report = ConditionReport::from_constants(
        regime,
        vec![(a_name, ExtReal::from_raw(a.value)), (b_name, ExtReal::from_raw(b.value))],
    );
    report.truncation = vec![
        TailDiagnostic { name: a_name, tail_ratio: a.ratio },
        TailDiagnostic { name: b_name, tail_ratio: b.ratio },
    ];
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterization::{continuous_constants, local_hardy_constant};
    use crate::discretization::build_discretizing_sequence;
    use crate::measure::Interval;

    fn unit() -> (Weight<f64>, Interval<f64>) {
        (Weight::constant(1.0), Interval::unit())
    }

    #[test]
    fn vanishing_u_gives_zero() {
        let (one, iv) = unit();
        let ds = build_discretizing_sequence(&one, &iv, 20).unwrap();
        let zero = Weight::constant(0.0);
        for (p, q, r) in [(2.0, 2.0, 2.0), (2.0, 3.0, 1.0), (3.0, 2.0, 4.0), (3.0, 2.0, 1.0)] {
            let e = Exponents::new(p, q, r).unwrap();
            let rep = discrete_constants(&e, &zero, &one, &ds).unwrap();
            assert!(rep.combined.is_zero(), "{rep:?}");
        }
    }

    #[test]
    fn b1_by_direct_summation() {
        let (one, iv) = unit();
        let ds = build_discretizing_sequence(&one, &iv, 20).unwrap();
        let e = Exponents::new(2.0, 2.0, 2.0).unwrap();
        let rep = discrete_constants(&e, &one, &one, &ds).unwrap();
        let x = |k: i32| 1.0 - 2f64.powi(-k);
        let want = (0..20)
            .map(|k| {
                let s: f64 = (k..20).map(|i| 2f64.powi(-i) * (x(i + 1) - x(i))).sum();
                s.sqrt() * x(k).sqrt()
            })
            .fold(0.0, f64::max);
        let got = rep.get(ConstantName::B1).unwrap().value();
        assert!((got - want).abs() / want < 1e-8, "{got} vs {want}");
        let c1 = continuous_constants(&e, &one, &one, &one, &iv).unwrap().combined.value();
        let ratio = rep.combined.value() / c1;
        assert!((1.0 / 256.0..=256.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn single_interval_matches_local_constant() {
        let (one, iv) = unit();
        let ds = build_discretizing_sequence(&one, &iv, 1).unwrap();
        assert_eq!(ds.points().len(), 2);
        let e = Exponents::new(2.0, 2.0, 3.0).unwrap();
        let rep = discrete_constants(&e, &one, &one, &ds).unwrap();
        let b = local_hardy_constant(&HardyExponents::from(e), &one, &one, &iv, 0.0, 0.5).unwrap().value();
        let want = 0.5f64.powf(1.0 / 3.0) * b;
        let got = rep.get(ConstantName::A1).unwrap().value();
        assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn reports_tail_ratios() {
        let (one, iv) = unit();
        let ds = build_discretizing_sequence(&one, &iv, 30).unwrap();
        let e = Exponents::new(3.0, 2.0, 1.0).unwrap();
        let rep = discrete_constants(&e, &one, &one, &ds).unwrap();
        assert_eq!(rep.regime, Regime::IV);
        assert_eq!(rep.truncation.len(), 2);
        assert!(rep.worst_tail() < 0.1);
    }

    #[test]
    fn non_decaying_sum_is_flagged() {
        // u grows like the inverse tail of w, so 2^{-k} U_k^{r/q} stays flat.
        let iv = Interval::unit();
        let w = Weight::constant(1.0);
        let u = Weight::power_law(1.0, 0.0, -2.0);
        let ds = build_discretizing_sequence(&w, &iv, 8).unwrap();
        let e = Exponents::new(2.0, 1.0, 1.0).unwrap();
        let err = discrete_constants(&e, &u, &Weight::constant(1.0), &ds).unwrap_err();
        assert!(matches!(err, Error::TruncationDominated { .. }), "{err:?}");
    }
}
