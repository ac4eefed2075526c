use crate::characterization::{Resolution, VProfile};
use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::measure::{HardyExponents, Interval, Quadrature, Weight};
use crate::mesh::{Cumulative, Mesh};
use crate::scalar::{conv, Real};

/// Best constant `B(x0, x1)` of `(∫_{x0}^{x1} (∫_{x0}^t h)^q u)^{1/q} <= B (∫_{x0}^{x1} h^p v)^{1/p}`,
/// through its two-branch characterization.
pub fn local_hardy_constant<T: Real>(
    e: &HardyExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    iv: &Interval<T>,
    x0: T,
    x1: T,
) -> Result<ExtReal<T>> {
    local_hardy_constant_with(e, u, v, iv, x0, x1, &Resolution::default())
}

pub fn local_hardy_constant_with<T: Real>(
    e: &HardyExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    iv: &Interval<T>,
    x0: T,
    x1: T,
    res: &Resolution<T>,
) -> Result<ExtReal<T>> {
    iv.check_range(x0, x1)?;
    u.validate()?;
    v.validate()?;
    let quad = Quadrature::with_tol(res.tol);
    local_on_mesh(e, u, v, iv, x0, x1, res.local_grid, res.refine, &quad).map(ExtReal::from_raw)
}

fn node_values<T: Real>(
    e: &HardyExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    mesh: &Mesh<T>,
    quad: &Quadrature<T>,
) -> Result<(Vec<T>, crate::mesh::Moments<T>)> {
    let (p, q) = (e.p, e.q);
    let um = mesh.moments(u, quad)?;
    let uc = Cumulative::new(&um.masses());
    let vp = VProfile::Dual(p).on(mesh, v, quad)?;
    let n = mesh.nodes.len();
    let vals = if p <= q {
        (0..n).map(|i| conv::mul(conv::pow(uc.to_end(i), q.recip()), vp[i])).collect()
    } else {
        let (e1, e2) = (q / (p - q), p * q / (p - q));
        (0..n).map(|i| conv::mul(conv::pow(uc.to_end(i), e1), conv::pow(vp[i], e2))).collect()
    };
    Ok((vals, um))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn local_on_mesh<T: Real>(
    e: &HardyExponents<T>,
    u: &Weight<T>,
    v: &Weight<T>,
    iv: &Interval<T>,
    x0: T,
    x1: T,
    cells: usize,
    refine: usize,
    quad: &Quadrature<T>,
) -> Result<T> {
    if x0 >= x1 {
        return Ok(T::zero());
    }
    let mut kinks = u.kinks(iv);
    kinks.extend(v.kinks(iv));
    let mesh = Mesh::new(*iv, x0, x1, cells, &kinks);
    let (vals, um) = node_values(e, u, v, &mesh, quad)?;
    if e.p > e.q {
        let s = um.trapezoid(&vals, 0, mesh.cells());
        return Ok(conv::pow(s, (e.p - e.q) / (e.p * e.q)));
    }
    let (mut best, mut at) = (T::zero(), 0);
    for (i, v) in vals.iter().enumerate() {
        if *v > best {
            best = *v;
            at = i;
        }
    }
    if best.is_finite() && best > T::zero() && refine > 0 {
        let fine = mesh.refined_near(at, refine);
        let (fv, _) = node_values(e, u, v, &fine, quad)?;
        best = fv.into_iter().fold(best, T::max);
    }
    Ok(best)
}
