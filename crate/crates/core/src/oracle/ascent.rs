use crate::scalar::{lit, Real};

pub(crate) struct Ascent<T> {
    pub value: T,
    pub x: Vec<T>,
    pub evals: usize,
}

/// Multiplicative coordinate ascent of a non-negative objective on `[0, inf)^n`.
///
/// Each coordinate tries `x_j · 2^{±s}` and `0` (or, when `x_j = 0`, `2^{-s}·max x`); the log
/// step `s` halves whenever a full sweep brings no improvement.
pub(crate) fn ascend<T, F>(mut x: Vec<T>, f: F, budget: usize) -> Ascent<T>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    let mut best = f(&x);
    let mut evals = 1;
    let mut step = 2.0f64;
    let gain = T::one() + lit(1e-12);
    while evals < budget && step >= 1.0 / 256.0 && best.is_finite() {
        let up: T = lit(step.exp2());
        let down = up.recip();
        let mut improved = false;
        for j in 0..x.len() {
            let old = x[j];
            let top = x.iter().fold(T::zero(), |m, v| m.max(*v));
            let tries = if old.is_zero() {
                let base = if top.is_zero() { T::one() } else { top };
                [base, base * down, base * down * down]
            } else {
                [old * up, old * down, T::zero()]
            };
            for c in tries {
                if evals >= budget {
                    break;
                }
                x[j] = c;
                let val = f(&x);
                evals += 1;
                if val > best * gain || (best.is_zero() && val > T::zero()) {
                    best = val;
                    improved = true;
                    break;
                }
                x[j] = old;
            }
            if !best.is_finite() {
                break;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ascent { value: best, x, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum_of_a_ratio() {
        // (x + 2y) / (x^2 + y^2)^{1/2} is maximal along (1, 2) with value √5.
        let f = |x: &[f64]| {
            let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if n == 0.0 {
                0.0
            } else {
                (x[0] + 2.0 * x[1]) / n
            }
        };
        let a = ascend(vec![1.0, 0.0], f, 10_000);
        assert!((a.value - 5f64.sqrt()).abs() < 1e-4, "{}", a.value);
    }

    #[test]
    fn respects_budget() {
        let a = ascend(vec![1.0; 10], |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64, 7);
        assert!(a.evals <= 7);
    }
}
