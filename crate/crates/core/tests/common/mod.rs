#![allow(dead_code)]

use hardy_core::{Exponents64, Interval64, Regime, Weight64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One draw of the random power-weight family on (0, 1).
#[derive(Debug, Clone)]
pub struct Config {
    pub e: Exponents64,
    pub u: Weight64,
    pub v: Weight64,
    pub w: Weight64,
    pub iv: Interval64,
}

pub fn exponents_in(rng: &mut ChaCha8Rng, regime: Regime) -> Exponents64 {
    let p = rng.gen_range(1.2..3.0);
    let up = |rng: &mut ChaCha8Rng| p * rng.gen_range(1.0..2.0);
    let down = |rng: &mut ChaCha8Rng| p * rng.gen_range(0.3..0.9);
    let (q, r) = match regime {
        Regime::I => (up(rng), up(rng)),
        Regime::II => (up(rng), down(rng)),
        Regime::III => (down(rng), up(rng)),
        Regime::IV => (down(rng), down(rng)),
    };
    Exponents64::new(p, q, r).unwrap()
}

/// `c x^α (1-x)^β` with exponents drawn so that every weight and `v^{1-p'}` stay integrable.
pub fn power_weights(rng: &mut ChaCha8Rng, p: f64) -> (Weight64, Weight64, Weight64) {
    let mut draw = |lo: f64, hi: f64, blo: f64, bhi: f64| {
        Weight64::power_law(rng.gen_range(0.5..2.0), rng.gen_range(lo..hi), rng.gen_range(blo..bhi))
    };
    let u = draw(-0.5, 1.0, -0.3, 0.5);
    let cap = (0.7 * (p - 1.0)).min(0.5);
    let v = draw(-0.5, cap, -0.3, cap.min(0.3));
    let w = draw(-0.5, 1.0, -0.5, 0.5);
    (u, v, w)
}

pub fn config(rng: &mut ChaCha8Rng, regime: Regime) -> Config {
    let e = exponents_in(rng, regime);
    let (u, v, w) = power_weights(rng, e.p);
    Config { e, u, v, w, iv: Interval64::unit() }
}

/// Random step function on (0, 1) with `pieces` pieces.
pub fn step_function(rng: &mut ChaCha8Rng, pieces: usize) -> hardy_core::TestFunction64 {
    let mut grid: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.02..0.98)).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid.insert(0, 0.0);
    grid.push(1.0);
    let values = (0..grid.len() - 1).map(|_| rng.gen_range(0.0..2.0)).collect();
    hardy_core::TestFunction64::PiecewiseConstant { grid, values }
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
