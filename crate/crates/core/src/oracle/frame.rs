//! Shared grid for evaluating the functionals of one configuration many times.

use crate::error::Result;
use crate::measure::{dual_density, Interval, Quadrature, Weight};
use crate::mesh::{Cumulative, Mesh, Moments};
use crate::scalar::{conv, lit, Real};

pub(crate) struct Frame<T> {
    pub iv: Interval<T>,
    pub mesh: Mesh<T>,
    pub u: Moments<T>,
    pub w: Moments<T>,
    pub v: Moments<T>,
    pub vmass: Vec<T>,
    /// Cell widths, with infinite cells set to zero so test functions vanish there.
    pub widths: Vec<T>,
    pub quad: Quadrature<T>,
}

impl<T: Real> Frame<T> {
    pub fn build(iv: &Interval<T>, u: &Weight<T>, v: &Weight<T>, w: &Weight<T>, cells: usize, extra: &[T]) -> Result<Self> {
        for x in [u, v, w] {
            x.validate()?;
        }
        let mut pts = extra.to_vec();
        for x in [u, v, w] {
            pts.extend(x.kinks(iv));
        }
        let mesh = Mesh::new(*iv, iv.a(), iv.b(), cells, &pts);
        let quad = Quadrature::with_tol(lit(1e-10));
        let um = mesh.moments(u, &quad)?;
        let wm = mesh.moments(w, &quad)?;
        let vm = mesh.moments(v, &quad)?;
        let widths = mesh
            .nodes
            .windows(2)
            .map(|x| {
                let h = x[1] - x[0];
                if h.is_finite() {
                    h
                } else {
                    T::zero()
                }
            })
            .collect();
        Ok(Self {
            iv: *iv,
            vmass: vm.masses(),
            mesh,
            u: um,
            w: wm,
            v: vm,
            widths,
            quad,
        })
    }

    pub fn cells(&self) -> usize {
        self.mesh.cells()
    }

    /// `∫_cell v^{-1/(p-1)}` for `p > 1`.
    pub fn dual_masses(&self, v: &Weight<T>, p: T) -> Result<Vec<T>> {
        let e = -T::one() / (p - T::one());
        let iv = self.iv;
        let mut m = self.mesh.masses_fn(&self.quad, |l| dual_density(v.eval(&iv, l), e))?;
        for (x, h) in m.iter_mut().zip(&self.widths) {
            if h.is_zero() {
                *x = T::zero();
            }
        }
        Ok(m)
    }

    /// `(∫ (∫_a^x (∫_a^t f)^q u)^{r/q} w)^{1/r}` where `d[k] = ∫_cell f`.
    pub fn lhs_iterated(&self, d: &[T], q: T, r: T) -> T {
        let rq = r / q;
        let (mut f0, mut g0, mut s) = (T::zero(), T::zero(), T::zero());
        let (mut fq0, mut gp0) = (T::zero(), T::zero());
        for k in 0..d.len() {
            let f1 = f0 + d[k];
            let fq1 = conv::pow(f1, q);
            let g1 = g0 + conv::mul(self.u.left[k], fq0) + conv::mul(self.u.right[k], fq1);
            let gp1 = conv::pow(g1, rq);
            s = s + conv::mul(self.w.left[k], gp0) + conv::mul(self.w.right[k], gp1);
            f0 = f1;
            fq0 = fq1;
            g0 = g1;
            gp0 = gp1;
        }
        conv::pow(s, r.recip())
    }

    /// `(∫ (∫_a^x (∫_s^x u) f(s) ds)^r w)^{1/r}`, with `f` taken constant on each cell.
    pub fn lhs_kernel_q1(&self, d: &[T], r: T) -> T {
        let um = self.u.masses();
        let ucum = Cumulative::new(&um);
        let n = self.mesh.nodes.len();
        // K(x_i) = Σ_{k<i} d_k (∫_{x_{k+1}}^{x_i} u + ∫_cell u λ)
        let kern: Vec<T> = (0..n)
            .map(|i| {
                (0..i)
                    .map(|k| conv::mul(d[k], ucum.seg(k + 1, i) + self.u.right[k]))
                    .fold(T::zero(), |a, b| a + b)
            })
            .collect();
        let g: Vec<T> = kern.iter().map(|x| conv::pow(*x, r)).collect();
        conv::pow(self.w.trapezoid(&g, 0, self.cells()), r.recip())
    }
}
