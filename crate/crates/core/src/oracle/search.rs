use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::measure::{Exponents, Interval, Weight};
use crate::oracle::ascent::ascend;
use crate::oracle::frame::Frame;
use crate::oracle::{OracleEstimate, TestFunction, DIVERGENCE};
use crate::scalar::{conv, count, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Cells of the evaluation grid.
    pub grid: usize,
    /// Cells of the piecewise-constant family explored by coordinate ascent.
    pub coarse: usize,
    pub starts: usize,
    /// Evaluations granted to coordinate ascent, split evenly across starts.
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid: 2048,
            coarse: 64,
            starts: 20,
            budget: 20_000,
            seed: 0x5eed,
        }
    }
}

/// Lower bound for the best constant of the iterated inequality, with default options.
pub fn best_constant_search<T: Real>(
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
    budget: usize,
) -> Result<OracleEstimate<T>> {
    let opts = SearchOptions {
        budget,
        ..SearchOptions::default()
    };
    best_constant_search_with(e, u, v, w, iv, &opts)
}

#[derive(Clone)]
struct Candidate<T> {
    value: T,
    f: TestFunction<T>,
}

impl<T: Real> Candidate<T> {
    fn better(self, other: Self) -> Self {
        if other.value > self.value {
            other
        } else {
            self
        }
    }
}

fn best_of<T: Real>(c: impl Iterator<Item = Candidate<T>>) -> Option<Candidate<T>> {
    c.reduce(Candidate::better)
}

/// Search state shared by the strategies.
struct Ctx<'a, T> {
    e: &'a Exponents<T>,
    frame: Frame<T>,
    /// Coarse cell of every grid cell, `None` for infinite cells.
    group: Vec<Option<usize>>,
    /// Grid node where each coarse cell starts, plus the end node.
    bounds: Vec<usize>,
    /// `∫ v` over each coarse cell.
    vgroup: Vec<T>,
    /// `∫ v^{-1/(p-1)}` over each grid cell (`p > 1`).
    dual: Option<Vec<T>>,
}

impl<'a, T: Real> Ctx<'a, T> {
    fn ratio(&self, d: &[T], rhs_p: T) -> T {
        let lhs = self.frame.lhs_iterated(d, self.e.q, self.e.r);
        conv::div(lhs, conv::pow(rhs_p, self.e.p.recip()))
    }

    fn coarse_ratio(&self, x: &[T]) -> T {
        let d: Vec<T> = (0..self.frame.cells())
            .map(|k| match self.group[k] {
                Some(j) => conv::mul(x[j], self.frame.widths[k]),
                None => T::zero(),
            })
            .collect();
        let rhs = x
            .iter()
            .zip(&self.vgroup)
            .map(|(x, m)| conv::mul(conv::pow(*x, self.e.p), *m))
            .fold(T::zero(), |a, b| a + b);
        self.ratio(&d, rhs)
    }

    fn coarse_function(&self, x: &[T]) -> TestFunction<T> {
        TestFunction::PiecewiseConstant {
            grid: self.bounds.iter().map(|i| self.frame.mesh.nodes[*i]).collect(),
            values: x.to_vec(),
        }
    }

    /// `v^{-1/(p-1)}` on grid cells `lo..hi`.
    fn dual_window(&self, lo: usize, hi: usize) -> Option<Candidate<T>> {
        let dm = self.dual.as_ref()?;
        let mut d = vec![T::zero(); dm.len()];
        d[lo..hi].copy_from_slice(&dm[lo..hi]);
        let rhs = d.iter().fold(T::zero(), |a, b| a + *b);
        let nodes = &self.frame.mesh.nodes;
        Some(Candidate {
            value: self.ratio(&d, rhs),
            f: TestFunction::DualCandidate { start: nodes[lo], cutoff: nodes[hi] },
        })
    }

    fn spike(&self, k: usize) -> Candidate<T> {
        let fr = &self.frame;
        let mut d = vec![T::zero(); fr.cells()];
        d[k] = fr.widths[k];
        let (x0, x1) = (fr.mesh.nodes[k], fr.mesh.nodes[k + 1]);
        Candidate {
            value: self.ratio(&d, fr.vmass[k]),
            f: TestFunction::Spike {
                center: x0 + (x1 - x0) / lit(2.0),
                width: x1 - x0,
                height: T::one(),
            },
        }
    }
}

/// Closed-form ratio at `f = (x - a)^γ` when `u`, `v`, `w` are all multiples of powers of
/// `x - a` on a bounded interval.
fn power_ratio<T: Real>(e: &Exponents<T>, mono: [(T, T); 3], len: T, gamma: T) -> T {
    let [(cu, au), (cv, av), (cw, aw)] = mono;
    let (p, q, r) = (e.p, e.q, e.r);
    let g1 = gamma + T::one();
    let e1 = q * g1 + au + T::one();
    let e2 = e1 * r / q + aw + T::one();
    let ev = gamma * p + av + T::one();
    if !(g1 > T::zero() && e1 > T::zero() && e2 > T::zero()) || cu.is_zero() || cw.is_zero() {
        return T::zero();
    }
    if !(ev > T::zero()) || cv.is_zero() {
        return T::infinity();
    }
    let ln_lhs_r = cw.ln() + (r / q) * (cu.ln() - q * g1.ln() - e1.ln()) + e2 * len.ln() - e2.ln();
    let ln_rhs_p = cv.ln() + ev * len.ln() - ev.ln();
    (ln_lhs_r / r - ln_rhs_p / p).exp()
}

fn power_ladder<T: Real>(e: &Exponents<T>, u: &Weight<T>, v: &Weight<T>, w: &Weight<T>, iv: &Interval<T>) -> Vec<Candidate<T>> {
    if !iv.is_bounded() {
        return Vec::new();
    }
    let (Some(mu), Some(mv), Some(mw)) = (u.left_monomial(iv), v.left_monomial(iv), w.left_monomial(iv)) else {
        return Vec::new();
    };
    let len = iv.b() - iv.a();
    let floor = (-(T::one() + mv.1) / e.p).max(-T::one());
    (1..=40)
        .map(|j| {
            let gamma = floor + lit::<T>(2.0).powi(-j);
            Candidate {
                value: power_ratio(e, [mu, mv, mw], len, gamma),
                f: TestFunction::PowerProfile { exponent: gamma },
            }
        })
        .collect()
}

pub fn best_constant_search_with<T: Real>(
    e: &Exponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    w: &Weight<T>,
    iv: &Interval<T>,
    opts: &SearchOptions,
) -> Result<OracleEstimate<T>> {
    let frame = Frame::build(iv, u, v, w, opts.grid, &[])?;
    let m = frame.cells();
    let coarse = opts.coarse.clamp(1, m);
    let mut group: Vec<Option<usize>> = (0..m)
        .map(|k| {
            if frame.widths[k].is_zero() {
                return None;
            }
            let mid = (frame.mesh.param(k) + frame.mesh.param(k + 1)) / lit(2.0);
            let s0 = frame.mesh.param(0);
            let s1 = frame.mesh.param(m);
            let j = ((mid - s0) / (s1 - s0) * count(coarse)).floor().to_usize().unwrap_or(0);
            Some(j.min(coarse - 1))
        })
        .collect();
    // Renumber so that every coarse cell is non-empty.
    let mut used: Vec<usize> = group.iter().flatten().copied().collect();
    used.dedup();
    for g in group.iter_mut().flatten() {
        *g = used.binary_search(g).expect("group present");
    }
    let ngroups = used.len();
    let mut bounds = vec![0usize; ngroups + 1];
    let mut vgroup = vec![T::zero(); ngroups];
    let mut seen = vec![false; ngroups];
    for k in 0..m {
        if let Some(j) = group[k] {
            if !seen[j] {
                bounds[j] = k;
                seen[j] = true;
            }
            bounds[j + 1] = k + 1;
            vgroup[j] = vgroup[j] + frame.vmass[k];
        }
    }
    let dual = if e.p > T::one() { Some(frame.dual_masses(v, e.p)?) } else { None };
    let ctx = Ctx { e, frame, group, bounds, vgroup, dual };
    let mut evaluations = 0usize;

    // Structured candidates.
    let mut structured: Vec<Candidate<T>> = Vec::new();
    if ctx.dual.is_some() {
        let cut = best_of((1..=m).into_par_iter().filter_map(|t| ctx.dual_window(0, t)).collect::<Vec<_>>().into_iter());
        evaluations += m;
        structured.extend(cut);
        let pairs: Vec<(usize, usize)> = (0..ngroups).flat_map(|s| (s..ngroups).map(move |l| (s, l))).collect();
        evaluations += pairs.len();
        let win = pairs
            .into_par_iter()
            .filter_map(|(s, l)| ctx.dual_window(ctx.bounds[s], ctx.bounds[l + 1]))
            .collect::<Vec<_>>();
        structured.extend(best_of(win.into_iter()));
    }
    let spikes: Vec<Candidate<T>> = (0..m)
        .into_par_iter()
        .filter(|k| !ctx.frame.widths[*k].is_zero())
        .map(|k| ctx.spike(k))
        .collect();
    evaluations += spikes.len();
    let best_spike = spikes
        .iter()
        .enumerate()
        .fold((T::zero(), 0usize), |acc, (i, c)| if c.value > acc.0 { (c.value, i) } else { acc });
    let spike_group = ctx.group.iter().flatten().nth(best_spike.1).copied().unwrap_or(0);
    structured.extend(best_of(spikes.into_iter()));
    let ladder = power_ladder(e, u, v, w, iv);
    evaluations += ladder.len();
    structured.extend(best_of(ladder.into_iter()));
    let structured_best = best_of(structured.into_iter()).unwrap_or(Candidate {
        value: T::zero(),
        f: TestFunction::constant(iv, T::zero()),
    });

    // Coordinate ascent over coarse step functions.
    let starts = opts.starts.max(1);
    let share = (opts.budget / starts).max(1);
    let mut inits: Vec<Vec<T>> = vec![vec![T::one(); ngroups]];
    if let Some(dm) = &ctx.dual {
        inits.push(
            (0..ngroups)
                .map(|j| {
                    let (lo, hi) = (ctx.bounds[j], ctx.bounds[j + 1]);
                    let mass = dm[lo..hi].iter().fold(T::zero(), |a, b| a + *b);
                    let width = ctx.frame.widths[lo..hi].iter().fold(T::zero(), |a, b| a + *b);
                    let c = conv::div(mass, width);
                    if c.is_finite() {
                        c
                    } else {
                        T::zero()
                    }
                })
                .collect(),
        );
    }
    let mut unit = vec![T::zero(); ngroups];
    unit[spike_group] = T::one();
    inits.push(unit);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while inits.len() < starts {
        let x: Vec<T> = (0..ngroups).map(|_| lit(rng.gen::<f64>().powi(4))).collect();
        inits.push(x);
    }
    inits.truncate(starts);
    let runs: Vec<(T, Vec<T>, usize)> = inits
        .into_par_iter()
        .map(|x0| {
            let a = ascend(x0, |x| ctx.coarse_ratio(x), share);
            (a.value, a.x, a.evals)
        })
        .collect();
    let mut best = structured_best.clone();
    for (value, x, n) in runs {
        evaluations += n;
        if value > best.value {
            best = Candidate { value, f: ctx.coarse_function(&x) };
        }
    }
    let cap = lit::<T>(DIVERGENCE);
    let clip = |v: T| if v > cap { ExtReal::infinity() } else { ExtReal::from_raw(v) };
    Ok(OracleEstimate {
        value: clip(best.value),
        argmax: best.f,
        evaluations,
        grid_size: opts.grid,
        structured: clip(structured_best.value),
    })
}
