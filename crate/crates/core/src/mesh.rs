//! Shared integration grid with per-cell weight moments.
//!
//! Nested integrals such as `∫_x^b w(t) (∫_x^t u)^{r/q} dt` are evaluated by product
//! trapezoid rules: for a cell `[x_k, x_{k+1}]` and a function `g` known at the nodes,
//! `∫_cell w g ≈ L_k g(x_k) + R_k g(x_{k+1})` with `L_k = ∫_cell w (1 - λ)`, `R_k = ∫_cell w λ`
//! and `λ` the linear hat rising from 0 to 1 across the cell. The moments are computed once
//! by graded quadrature, so endpoint singularities of the weight are integrated exactly
//! while `g` only needs node values.

use rayon::prelude::*;

use crate::error::Result;
use crate::measure::ess_sup::ess_sup_loc;
use crate::measure::{Interval, Loc, Quadrature, Weight};
use crate::scalar::{conv, count, lit, Real};

const GRADE_LEVELS: i32 = 40;

#[derive(Debug, Clone)]
pub(crate) struct Mesh<T> {
    pub iv: Interval<T>,
    pub nodes: Vec<T>,
    params: Vec<T>,
}

impl<T: Real> Mesh<T> {
    /// `cells` cells uniform in the interval parameter over `[lo, hi]`, geometrically graded
    /// toward both ends, with `extra` points inserted.
    pub fn new(iv: Interval<T>, lo: T, hi: T, cells: usize, extra: &[T]) -> Self {
        let cells = cells.max(2);
        let (s0, s1) = (iv.to_param(lo), iv.to_param(hi));
        let h = (s1 - s0) / count(cells);
        let mut params: Vec<T> = (0..=cells).map(|i| s0 + h * count(i)).collect();
        params[cells] = s1;
        for j in 1..=GRADE_LEVELS {
            let d = h * lit::<T>(2.0).powi(-j);
            params.push(s0 + d);
            params.push(s1 - d);
        }
        let mut nodes: Vec<T> = params.iter().map(|s| iv.from_param(*s)).collect();
        nodes[0] = lo;
        nodes[cells] = hi;
        nodes.extend(extra.iter().copied().filter(|x| *x > lo && *x < hi));
        Self::from_nodes(iv, nodes)
    }

    pub fn from_nodes(iv: Interval<T>, mut nodes: Vec<T>) -> Self {
        nodes.retain(|x| !x.is_nan());
        nodes.sort_by(|x, y| x.partial_cmp(y).expect("nodes are not NaN"));
        nodes.dedup();
        let params = nodes.iter().map(|x| iv.to_param(*x)).collect();
        Self { iv, nodes, params }
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    #[cfg(test)]
    pub fn lo(&self) -> T {
        self.nodes[0]
    }

    #[cfg(test)]
    pub fn hi(&self) -> T {
        self.nodes[self.cells()]
    }

    /// Interval parameter of node `i`.
    pub fn param(&self, i: usize) -> T {
        self.params[i]
    }

    /// Adds `n` equally spaced nodes on each side of node `i`.
    pub fn refined_near(&self, i: usize, n: usize) -> Self {
        let mut nodes = self.nodes.clone();
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.cells());
        for k in lo..hi {
            let (s0, s1) = (self.params[k], self.params[k + 1]);
            for j in 1..=n {
                let s = s0 + (s1 - s0) * count(j) / count(n + 1);
                nodes.push(self.iv.from_param(s));
            }
        }
        Self::from_nodes(self.iv, nodes)
    }

    #[cfg(test)]
    /// Index of the node equal to `x`, if any.
    pub fn node_index(&self, x: T) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.partial_cmp(&x).expect("nodes are not NaN")).ok()
    }

    /// Hat coordinate of `at` inside cell `k`.
    fn hat(&self, k: usize, at: Loc<T>) -> T {
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        let lam = if x0.is_finite() && x1.is_finite() {
            if at.to_b < at.from_a && self.iv.b().is_finite() {
                // Measure from the right node to keep precision near b.
                let gap = (self.iv.b() - x1).max(T::zero());
                T::one() - (at.to_b - gap) / (x1 - x0)
            } else {
                (at.x - x0) / (x1 - x0)
            }
        } else {
            (self.iv.to_param(at.x) - self.params[k]) / (self.params[k + 1] - self.params[k])
        };
        lam.max(T::zero()).min(T::one())
    }

    fn grading(&self, k: usize) -> (bool, bool) {
        (self.nodes[k] == self.iv.a(), self.nodes[k + 1] == self.iv.b())
    }

    /// Product-trapezoid moments of the density `g`.
    pub fn moments_fn<G>(&self, quad: &Quadrature<T>, g: G) -> Result<Moments<T>>
    where
        G: Fn(Loc<T>) -> T + Sync,
    {
        let pairs: Result<Vec<(T, T)>> = (0..self.cells())
            .into_par_iter()
            .map(|k| {
                let (glo, ghi) = self.grading(k);
                let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
                let left = quad.integrate_graded(&self.iv, x0, x1, &|l: Loc<T>| {
                    conv::mul(g(l), T::one() - self.hat(k, l))
                }, glo, ghi)?;
                let right = quad.integrate_graded(&self.iv, x0, x1, &|l: Loc<T>| {
                    conv::mul(g(l), self.hat(k, l))
                }, glo, ghi)?;
                Ok((left, right))
            })
            .collect();
        let (left, right) = pairs?.into_iter().unzip();
        Ok(Moments { left, right })
    }

    pub fn moments(&self, w: &Weight<T>, quad: &Quadrature<T>) -> Result<Moments<T>> {
        let iv = self.iv;
        self.moments_fn(quad, |l| w.eval(&iv, l))
    }

    /// `∫_cell g` for every cell.
    pub fn masses_fn<G>(&self, quad: &Quadrature<T>, g: G) -> Result<Vec<T>>
    where
        G: Fn(Loc<T>) -> T + Sync,
    {
        (0..self.cells())
            .into_par_iter()
            .map(|k| {
                let (glo, ghi) = self.grading(k);
                quad.integrate_graded(&self.iv, self.nodes[k], self.nodes[k + 1], &g, glo, ghi)
            })
            .collect()
    }

    /// `ess sup_cell g` for every cell; cells at the ends of the interval get endpoint probing.
    pub fn cell_sups<G>(&self, g: G) -> Vec<T>
    where
        G: Fn(Loc<T>) -> T + Sync,
    {
        (0..self.cells())
            .into_par_iter()
            .map(|k| {
                let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
                let (glo, ghi) = self.grading(k);
                if glo || ghi || !x0.is_finite() || !x1.is_finite() {
                    return ess_sup_loc(&self.iv, x0, x1, &g).value;
                }
                let h = x1 - x0;
                let mut m = T::zero();
                for f in [1e-9, 0.05, 0.15, 0.25, 0.35, 0.5, 0.65, 0.75, 0.85, 0.95, 1.0 - 1e-9] {
                    let v = g(self.iv.loc(x0 + h * lit(f)));
                    if v > m {
                        m = v;
                    }
                }
                m
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Moments<T> {
    pub left: Vec<T>,
    pub right: Vec<T>,
}

impl<T: Real> Moments<T> {
    pub fn masses(&self) -> Vec<T> {
        self.left.iter().zip(&self.right).map(|(l, r)| *l + *r).collect()
    }

    /// `Σ_k L_k g_k + R_k g_{k+1}` over cells `from..to`.
    pub fn trapezoid(&self, g: &[T], from: usize, to: usize) -> T {
        let mut s = T::zero();
        for k in from..to {
            s = s + conv::mul(self.left[k], g[k]) + conv::mul(self.right[k], g[k + 1]);
        }
        s
    }

    /// Running integrals `∫_{x_0}^{x_i} w g` at every node.
    pub fn running(&self, g: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(g.len());
        let mut s = T::zero();
        out.push(s);
        for k in 0..self.left.len() {
            s = s + conv::mul(self.left[k], g[k]) + conv::mul(self.right[k], g[k + 1]);
            out.push(s);
        }
        out
    }
}

/// Prefix and suffix sums of cell masses with exact bookkeeping of infinite cells.
#[derive(Debug, Clone)]
pub(crate) struct Cumulative<T> {
    pre: Vec<T>,
    suf: Vec<T>,
    pre_inf: Vec<u32>,
}

impl<T: Real> Cumulative<T> {
    pub fn new(masses: &[T]) -> Self {
        let n = masses.len();
        let mut pre = vec![T::zero(); n + 1];
        let mut pre_inf = vec![0u32; n + 1];
        for k in 0..n {
            let m = masses[k];
            pre[k + 1] = pre[k] + if m.is_finite() { m } else { T::zero() };
            pre_inf[k + 1] = pre_inf[k] + u32::from(!m.is_finite());
        }
        let mut suf = vec![T::zero(); n + 1];
        for k in (0..n).rev() {
            let m = masses[k];
            suf[k] = suf[k + 1] + if m.is_finite() { m } else { T::zero() };
        }
        Self { pre, suf, pre_inf }
    }

    /// Mass between nodes `i <= j`, subtracting from whichever end keeps the operands small.
    pub fn seg(&self, i: usize, j: usize) -> T {
        if j <= i {
            return T::zero();
        }
        if self.pre_inf[j] > self.pre_inf[i] {
            return T::infinity();
        }
        let d = if self.pre[j] <= self.suf[i] {
            self.pre[j] - self.pre[i]
        } else {
            self.suf[i] - self.suf[j]
        };
        d.max(T::zero())
    }

    pub fn nodes(&self) -> usize {
        self.pre.len()
    }

    pub fn from_start(&self, j: usize) -> T {
        self.seg(0, j)
    }

    pub fn to_end(&self, i: usize) -> T {
        self.seg(i, self.pre.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_is_graded_and_sorted() {
        let m = Mesh::new(Interval::unit(), 0.0f64, 1.0, 16, &[0.3]);
        assert!(m.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.lo(), 0.0);
        assert_eq!(m.hi(), 1.0);
        assert!(m.nodes[1] < 1e-12);
        assert!(m.node_index(0.3).is_some());
    }

    #[test]
    fn half_line_mesh_reaches_infinity() {
        let iv = Interval::new(0.0f64, f64::INFINITY).unwrap();
        let m = Mesh::new(iv, 0.0, f64::INFINITY, 8, &[]);
        assert_eq!(m.hi(), f64::INFINITY);
        assert!(m.nodes[m.cells() - 1].is_finite());
    }

    #[test]
    fn trapezoid_moments_are_exact_for_linear_functions() {
        let iv = Interval::unit();
        let m = Mesh::new(iv, 0.0f64, 1.0, 8, &[]);
        let w = Weight::power_law(1.0, -0.5, 0.0);
        let mo = m.moments(&w, &Quadrature::with_tol(1e-12)).unwrap();
        // ∫_0^1 x^{-1/2} · x dx = 2/3
        let g: Vec<f64> = m.nodes.clone();
        let v = mo.trapezoid(&g, 0, m.cells());
        assert!((v - 2.0 / 3.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn cumulative_segments() {
        let c = Cumulative::new(&[f64::INFINITY, 1.0, 2.0, 3.0]);
        assert_eq!(c.seg(1, 3), 3.0);
        assert_eq!(c.seg(2, 4), 5.0);
        assert!(c.seg(0, 2).is_infinite());
        assert_eq!(c.to_end(1), 6.0);
        assert_eq!(c.seg(2, 2), 0.0);
    }
}
