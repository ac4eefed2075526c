use rayon::prelude::*;

use crate::characterization::{classify, classify_monotone, split, ConditionReport, ConstantName, Regime, Resolution};
use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::measure::{dual_density, Exponents, Interval, MonotoneExponents, Quadrature, Weight};
use crate::mesh::{Cumulative, Mesh, Moments};
use crate::scalar::{conv, lit, Real};

/// Exponents of the generic constant formulas. `p` may be 1 while `q < 1`: the monotone
/// constants are the iterated ones at `(1, 1/p, q/p)` with a different dual profile.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Triple<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

/// How the dual quantity `V(a, x)` is built from `v`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum VProfile<T> {
    /// `V_p(lo, x)` from the left end of the mesh.
    Dual(T),
    /// `(∫_x^b v)^{-1}`.
    Tail,
}

impl<T: Real> VProfile<T> {
    pub fn on(self, mesh: &Mesh<T>, v: &Weight<T>, quad: &Quadrature<T>) -> Result<Vec<T>> {
        let iv = mesh.iv;
        match self {
            VProfile::Dual(p) if p == T::one() => {
                let sups = mesh.cell_sups(|l| conv::div(T::one(), v.eval(&iv, l)));
                let mut out = Vec::with_capacity(sups.len() + 1);
                let mut m = T::zero();
                out.push(m);
                for s in sups {
                    m = m.max(s);
                    out.push(m);
                }
                Ok(out)
            }
            VProfile::Dual(p) => {
                let e = -T::one() / (p - T::one());
                let masses = mesh.masses_fn(quad, |l| dual_density(v.eval(&iv, l), e))?;
                let c = Cumulative::new(&masses);
                let ex = (p - T::one()) / p;
                Ok((0..c.nodes()).map(|i| conv::pow(c.from_start(i), ex)).collect())
            }
            VProfile::Tail => {
                let masses = mesh.moments(v, quad)?.masses();
                let c = Cumulative::new(&masses);
                Ok((0..c.nodes()).map(|i| conv::div(T::one(), c.to_end(i))).collect())
            }
        }
    }
}

/// Node-level quantities shared by the constant formulas.
pub(crate) struct Engine<T> {
    pub mesh: Mesh<T>,
    pub u: Moments<T>,
    pub ucum: Cumulative<T>,
    pub w: Moments<T>,
    pub wstar: Vec<T>,
    pub v: Vec<T>,
    pub e: Triple<T>,
}

struct Inputs<'a, T> {
    u: &'a Weight<T>,
    v: &'a Weight<T>,
    w: &'a Weight<T>,
    profile: VProfile<T>,
    e: Triple<T>,
    quad: Quadrature<T>,
}

impl<T: Real> Engine<T> {
    fn build(mesh: Mesh<T>, inp: &Inputs<'_, T>) -> Result<Self> {
        let u = mesh.moments(inp.u, &inp.quad)?;
        let w = mesh.moments(inp.w, &inp.quad)?;
        let v = inp.profile.on(&mesh, inp.v, &inp.quad)?;
        let ucum = Cumulative::new(&u.masses());
        let wcum = Cumulative::new(&w.masses());
        let wstar = (0..wcum.nodes()).map(|i| wcum.to_end(i)).collect();
        Ok(Self {
            mesh,
            u,
            ucum,
            w,
            wstar,
            v,
            e: inp.e,
        })
    }

    fn nodes(&self) -> usize {
        self.mesh.nodes.len()
    }

    /// `∫_{x_i}^b w(t) (∫_{x_i}^t u)^{r/q} dt`.
    pub fn j_at(&self, i: usize) -> T {
        let ex = self.e.r / self.e.q;
        let m = self.mesh.cells();
        let mut s = T::zero();
        let mut g0 = T::zero();
        for k in i..m {
            let g1 = conv::pow(self.ucum.seg(i, k + 1), ex);
            s = s + conv::mul(self.w.left[k], g0) + conv::mul(self.w.right[k], g1);
            g0 = g1;
        }
        s
    }

    /// `∫_a^{x_i} (∫_t^{x_i} u)^{q/(p-q)} u(t) V(t)^{pq/(p-q)} dt`.
    pub fn i4_at(&self, i: usize) -> T {
        let Triple { p, q, .. } = self.e;
        let (e1, e2) = (q / (p - q), p * q / (p - q));
        let h = |k: usize| conv::mul(conv::pow(self.ucum.seg(k, i), e1), conv::pow(self.v[k], e2));
        let mut s = T::zero();
        if i == 0 {
            return s;
        }
        let mut h0 = h(0);
        for k in 0..i {
            let h1 = h(k + 1);
            s = s + conv::mul(self.u.left[k], h0) + conv::mul(self.u.right[k], h1);
            h0 = h1;
        }
        s
    }

    /// `ln sup_{t <= x_i} (∫_t^{x_i} u)^{eu} V(t)^{ev}` over nodes.
    fn ln_inner_sup(&self, i: usize, eu: T, ev: T) -> T {
        (0..=i)
            .map(|k| ln_mul(ln_pow(self.ucum.seg(k, i), eu), ln_pow(self.v[k], ev)))
            .fold(T::neg_infinity(), T::max)
    }

    fn c1_at(&self, i: usize) -> T {
        conv::mul(conv::pow(self.j_at(i), self.e.r.recip()), self.v[i])
    }

    fn c4_at(&self, i: usize) -> T {
        let Triple { p, q, r } = self.e;
        conv::mul(conv::pow(self.wstar[i], r.recip()), conv::pow(self.i4_at(i), (p - q) / (p * q)))
    }

    /// `(∫ w g)^{(p-r)/(pr)}` from `ln g`. The large powers in the integrands leave `f64` range
    /// long before the result does, so the sum is shifted by its largest term.
    fn outer(&self, lg: &[T]) -> T {
        let Triple { p, r, .. } = self.e;
        let e = (p - r) / (p * r);
        let top = lg.iter().copied().fold(T::neg_infinity(), T::max);
        if !top.is_finite() {
            let g: Vec<T> = lg.iter().map(|l| l.exp()).collect();
            return conv::pow(self.w.trapezoid(&g, 0, self.mesh.cells()), e);
        }
        let g: Vec<T> = lg.iter().map(|l| (*l - top).exp()).collect();
        let s = self.w.trapezoid(&g, 0, self.mesh.cells());
        if s.is_zero() || s.is_infinite() {
            return conv::pow(s, e);
        }
        ((top + s.ln()) * e).exp()
    }

    fn c2(&self) -> T {
        let Triple { p, q, r } = self.e;
        let (eu, ev, ew) = (r * p / (q * (p - r)), p * r / (p - r), r / (p - r));
        let lg: Vec<T> = (0..self.nodes())
            .into_par_iter()
            .map(|i| ln_mul(ln_pow(self.wstar[i], ew), self.ln_inner_sup(i, eu, ev)))
            .collect();
        self.outer(&lg)
    }

    fn c3(&self, j: &[T]) -> T {
        let Triple { p, q, r } = self.e;
        let (eu, ev, ej) = (r / q, p * r / (p - r), r / (p - r));
        let lg: Vec<T> = (0..self.nodes())
            .into_par_iter()
            .map(|i| ln_mul(ln_pow(j[i], ej), self.ln_inner_sup(i, eu, ev)))
            .collect();
        self.outer(&lg)
    }

    fn c5(&self) -> T {
        let Triple { p, q, r } = self.e;
        let (ew, ei) = (r / (p - r), r * (p - q) / (q * (p - r)));
        let lg: Vec<T> = (0..self.nodes())
            .into_par_iter()
            .map(|i| ln_mul(ln_pow(self.wstar[i], ew), ln_pow(self.i4_at(i), ei)))
            .collect();
        self.outer(&lg)
    }
}

/// `ln a^e` under the conventions of [`conv::pow`].
fn ln_pow<T: Real>(a: T, e: T) -> T {
    if e.is_zero() {
        T::zero()
    } else {
        e * a.ln()
    }
}

/// `ln(xy)` from `ln x` and `ln y`, with `0·inf = 0`.
fn ln_mul<T: Real>(x: T, y: T) -> T {
    if x == T::neg_infinity() || y == T::neg_infinity() {
        T::neg_infinity()
    } else {
        x + y
    }
}

fn argmax<T: Real>(vals: &[T]) -> (T, usize) {
    let mut best = (T::zero(), 0);
    for (i, v) in vals.iter().enumerate() {
        if *v > best.0 {
            best = (*v, i);
        }
    }
    best
}

/// Graded nodes inspected at each end of the mesh by [`runs_off`].
const END_NODES: usize = 8;

/// True when the node values keep climbing toward `a` or `b` without slowing down over the
/// deepest graded nodes (increments at halving distances that do not shrink). A supremum with
/// a finite limit has increments decaying geometrically there; power and log blow-ups do not.
fn runs_off<T: Real>(vals: &[T]) -> bool {
    let n = vals.len();
    if n < 2 * END_NODES + 4 {
        return false;
    }
    let climbs = |seq: &mut dyn Iterator<Item = T>| {
        let s: Vec<T> = seq.collect();
        if !s.iter().all(|x| x.is_finite()) {
            return false;
        }
        let d: Vec<T> = s.windows(2).map(|w| w[1] - w[0]).collect();
        d.iter().zip(&s[1..]).all(|(d, x)| *d > lit::<T>(1e-9) * *x)
            && d.windows(2).all(|w| w[1] >= w[0] * lit(1.0 - 1e-6))
    };
    // Endpoints themselves are skipped: the formulas often degenerate to 0 there.
    climbs(&mut vals[1..=END_NODES + 1].iter().rev().copied())
        || climbs(&mut vals[n - END_NODES - 2..n - 1].iter().copied())
}

/// Node supremum of `f`, re-evaluated on a mesh refined around the maximizer.
fn refined_sup<T, F>(base: &Engine<T>, inp: &Inputs<'_, T>, res: &Resolution<T>, f: F) -> Result<T>
where
    T: Real,
    F: Fn(&Engine<T>, usize) -> T + Sync,
{
    let vals: Vec<T> = (0..base.nodes()).into_par_iter().map(|i| f(base, i)).collect();
    if runs_off(&vals) {
        return Ok(T::infinity());
    }
    let (best, i) = argmax(&vals);
    if !best.is_finite() || best.is_zero() || res.refine == 0 {
        return Ok(best);
    }
    let (lo, hi) = (
        base.mesh.nodes[i.saturating_sub(1)],
        base.mesh.nodes[(i + 1).min(base.mesh.cells())],
    );
    let fine = Engine::build(base.mesh.refined_near(i, res.refine), inp)?;
    let window: Vec<usize> = (0..fine.nodes())
        .filter(|k| fine.mesh.nodes[*k] >= lo && fine.mesh.nodes[*k] <= hi)
        .collect();
    let refined = window.into_par_iter().map(|k| f(&fine, k)).reduce(T::zero, T::max);
    Ok(best.max(refined))
}

/// Constants of one regime of the generic formulas, each raised to `power`.
fn compute<T: Real>(
    iv: &Interval<T>,
    inp: &Inputs<'_, T>,
    regime: Regime,
    names: [ConstantName; 5],
    power: T,
    res: &Resolution<T>,
) -> Result<Vec<(ConstantName, ExtReal<T>)>> {
    for w in [inp.u, inp.v, inp.w] {
        w.validate()?;
    }
    let mut extra = Vec::new();
    for w in [inp.u, inp.v, inp.w] {
        extra.extend(w.kinks(iv));
    }
    let mesh = Mesh::new(*iv, iv.a(), iv.b(), res.grid, &extra);
    let eng = Engine::build(mesh, inp)?;
    let need_j = matches!(regime, Regime::II | Regime::IV);
    let j: Vec<T> = if need_j {
        (0..eng.nodes()).into_par_iter().map(|i| eng.j_at(i)).collect()
    } else {
        Vec::new()
    };
    let [n1, n2, n3, n4, n5] = names;
    let mut out = Vec::new();
    let mut push = |n: ConstantName, v: T| out.push((n, ExtReal::from_raw(conv::pow(v, power))));
    match regime {
        Regime::I => push(n1, refined_sup(&eng, inp, res, Engine::c1_at)?),
        Regime::II => {
            push(n2, eng.c2());
            push(n3, eng.c3(&j));
        }
        Regime::III => {
            push(n1, refined_sup(&eng, inp, res, Engine::c1_at)?);
            push(n4, refined_sup(&eng, inp, res, Engine::c4_at)?);
        }
        Regime::IV => {
            push(n3, eng.c3(&j));
            push(n5, eng.c5());
        }
    }
    Ok(out)
}

pub fn continuous_constants<T: Real>(
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
) -> Result<ConditionReport<T>> {
    continuous_constants_with(e, u, v, w, iv, &Resolution::default())
}

pub fn continuous_constants_with<T: Real>(
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
    res: &Resolution<T>,
) -> Result<ConditionReport<T>> {
    use ConstantName::*;
    let regime = classify(e);
    let inp = Inputs {
        u,
        v,
        w,
        profile: VProfile::Dual(e.p),
        e: Triple { p: e.p, q: e.q, r: e.r },
        quad: Quadrature::with_tol(res.tol),
    };
    let constants = compute(iv, &inp, regime, [C1, C2, C3, C4, C5], T::one(), res)?;
    Ok(ConditionReport::from_constants(regime, constants))
}

/// Constants for `(∫_a^b (∫_a^x f u)^q w)^{1/q} <= C (∫_a^b f^p v)^{1/p}` over non-decreasing `f`.
pub fn monotone_constants<T: Real>(
    e: &MonotoneExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
) -> Result<ConditionReport<T>> {
    monotone_constants_with(e, u, v, w, iv, &Resolution::default())
}

pub fn monotone_constants_with<T: Real>(
    e: &MonotoneExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
    res: &Resolution<T>,
) -> Result<ConditionReport<T>> {
    use ConstantName::*;
    let regime = classify_monotone(e);
    let t = Triple {
        p: T::one(),
        q: e.p.recip(),
        r: e.q / e.p,
    };
    debug_assert_eq!(regime, split(t.p, t.q, t.r));
    let inp = Inputs {
        u,
        v,
        w,
        profile: VProfile::Tail,
        e: t,
        quad: Quadrature::with_tol(res.tol),
    };
    let constants = compute(iv, &inp, regime, [CalC1, CalC2, CalC3, CalC4, CalC5], e.p.recip(), res)?;
    Ok(ConditionReport::from_constants(regime, constants))
}
