//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{config, power_weights, rel, rng, step_function, Config};
use hardy_core::characterization::{continuous_constants, discrete_constants, ConditionReport, ConstantName};
use hardy_core::discretization::{build_discretizing_sequence, deepen, lemma_pair, LemmaInput, LemmaKind, NonNegSequence};
use hardy_core::characterization::local_hardy_constant;
use hardy_core::measure::{integrate, vp};
use hardy_core::oracle::{
    best_constant_search_with, discrete_best_constant, lhs_iterated, lhs_kernel_q1,
    monotone_pair_check, SearchOptions, SequenceKind, TestFunction,
};
use hardy_core::{Exponents64, HardyExponents64, Interval64, MonotoneExponents64, Regime, Weight64};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const REGIMES: [Regime; 4] = [Regime::I, Regime::II, Regime::III, Regime::IV];

fn c1_anchor() -> Outcome {
    let t = Instant::now();
    let one = Weight64::constant(1.0);
    let e = Exponents64::new(2.0, 2.0, 2.0).unwrap();
    let rep = continuous_constants(&e, &one, &one, &one, &Interval64::unit()).unwrap();
    let c1 = rep.get(ConstantName::C1).unwrap().value();
    let want = (2.0f64 / 27.0).sqrt();
    let err = rel(c1, want);
    let secs = t.elapsed().as_secs_f64();
    outcome(err <= 1e-4 && secs < 5.0, format!("C1 = {c1:.8}, rel err {err:.1e}, {secs:.2}s"))
}

fn scaled(rep: &ConditionReport<f64>, base: &ConditionReport<f64>, factor: f64) -> f64 {
    let mut worst = 0.0f64;
    for (name, c) in &base.constants {
        let s = rep.get(*name).unwrap();
        let d = if c.is_infinite() || s.is_infinite() {
            if c.is_infinite() == s.is_infinite() { 0.0 } else { 1.0 }
        } else {
            rel(s.value(), c.value() * factor)
        };
        worst = worst.max(d);
    }
    worst
}

fn homogeneity() -> Outcome {
    let t = Instant::now();
    let mut r = rng(2);
    let opts = SearchOptions { grid: 512, budget: 2000, ..SearchOptions::default() };
    let (mut worst_c, mut worst_o) = (0.0f64, 0.0f64);
    for i in 0..10 {
        let c = config(&mut r, REGIMES[i % 4]);
        let Config { e, u, v, w, iv } = &c;
        let base = continuous_constants(e, u, v, w, iv).unwrap();
        let base_o = best_constant_search_with(e, u, v, w, iv, &opts).unwrap().value.value();
        for lam in [10.0, 1000.0] {
            let cases = [
                (u.scaled(lam), v.clone(), w.clone(), lam.powf(1.0 / e.q)),
                (u.clone(), v.scaled(lam), w.clone(), lam.powf(-1.0 / e.p)),
                (u.clone(), v.clone(), w.scaled(lam), lam.powf(1.0 / e.r)),
            ];
            for (su, sv, sw, factor) in cases {
                let rep = continuous_constants(e, &su, &sv, &sw, iv).unwrap();
                worst_c = worst_c.max(scaled(&rep, &base, factor));
                let o = best_constant_search_with(e, &su, &sv, &sw, iv, &opts).unwrap().value.value();
                worst_o = worst_o.max(rel(o, base_o * factor));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst_c <= 1e-10 && worst_o <= 1e-4 && secs < 120.0,
        format!("worst constant drift {worst_c:.1e}, worst oracle drift {worst_o:.1e}, {secs:.1}s"),
    )
}

struct FamilyRow {
    regime: Regime,
    index: usize,
    config: Config,
    combined: f64,
    oracle: f64,
    structured: f64,
}

fn family() -> (Vec<FamilyRow>, Duration) {
    let t = Instant::now();
    let mut r = rng(3);
    let mut rows = Vec::new();
    for regime in REGIMES {
        for index in 0..20 {
            let c = config(&mut r, regime);
            let rep = continuous_constants(&c.e, &c.u, &c.v, &c.w, &c.iv).unwrap();
            let est = best_constant_search_with(&c.e, &c.u, &c.v, &c.w, &c.iv, &SearchOptions::default()).unwrap();
            rows.push(FamilyRow {
                regime,
                index,
                combined: rep.combined.value(),
                oracle: est.value.value(),
                structured: est.structured.value(),
                config: c,
            });
        }
    }
    (rows, t.elapsed())
}

fn soundness(rows: &[FamilyRow], took: Duration) -> Outcome {
    let mut worst = (0.0f64, String::new());
    let mut bad = Vec::new();
    for row in rows {
        let ratio = row.oracle / row.combined;
        if ratio > worst.0 {
            worst = (ratio, format!("{} #{}", row.regime, row.index));
        }
        if !(ratio <= 16.0) {
            bad.push(format!("{} #{}: {:?}", row.regime, row.index, row.config));
        }
    }
    for b in &bad {
        println!("  violation: {b}");
    }
    let secs = took.as_secs_f64();
    outcome(
        bad.is_empty() && secs < 1800.0,
        format!("worst oracle/combined = {:.3} ({}), {} configs, {secs:.0}s", worst.0, worst.1, rows.len()),
    )
}

fn saturation(rows: &[FamilyRow]) -> Outcome {
    let mut worst = (f64::INFINITY, String::new());
    let mut bad = Vec::new();
    for row in rows {
        let ratio = row.structured / row.combined;
        if ratio < worst.0 {
            worst = (ratio, format!("{} #{}", row.regime, row.index));
        }
        if !(ratio >= 1.0 / 256.0) {
            bad.push(format!("{} #{}: {:?}", row.regime, row.index, row.config));
        }
    }
    for b in &bad {
        println!("  violation: {b}");
    }
    outcome(bad.is_empty(), format!("worst structured/combined = {:.4} ({})", worst.0, worst.1))
}

fn degeneracy() -> Outcome {
    let iv = Interval64::unit();
    let one = Weight64::constant(1.0);
    let v = Weight64::power_law(1.0, 1.0, 0.0);
    let e = Exponents64::new(2.0, 2.0, 2.0).unwrap();
    let rep = continuous_constants(&e, &one, &v, &one, &iv).unwrap();
    let mut detail = format!("finite = {}", rep.finite);
    let mut pass = !rep.finite;
    for grid in [512, 1024] {
        let opts = SearchOptions { grid, ..SearchOptions::default() };
        let est = best_constant_search_with(&e, &one, &v, &one, &iv, &opts).unwrap();
        detail.push_str(&format!(", oracle@{grid} = {:.3e}", est.value.value()));
        pass &= est.value.value() > 1e3;
    }
    outcome(pass, detail)
}

fn fubini() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f = step_function(&mut r, 6);
        let (u, _, w) = power_weights(&mut r, 2.0);
        let rr = r.gen_range(0.5..3.0);
        let iv = Interval64::unit();
        let e = Exponents64::new(1.0, 1.0, rr).unwrap();
        let a = lhs_iterated(&f, &e, &u, &w, &iv).unwrap().value();
        let b = lhs_kernel_q1(&f, &u, &w, rr, &iv).unwrap().value();
        worst = worst.max(rel(a, b));
    }
    outcome(worst <= 1e-6, format!("worst relative gap {worst:.1e} over 10 draws"))
}

fn monotone() -> Outcome {
    let mut r = rng(7);
    let iv = Interval64::unit();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let h = step_function(&mut r, 5);
        let e = MonotoneExponents64::new(r.gen_range(0.5..3.0), r.gen_range(0.5..3.0)).unwrap();
        let (u, v, w) = power_weights(&mut r, 2.0);
        let (a, b) = monotone_pair_check(&h, &e, &u, &v, &w, &iv).unwrap();
        worst = worst.max(rel(a.value(), b.value()));
    }
    let one = Weight64::constant(1.0);
    let e = MonotoneExponents64::new(1.0, 1.0).unwrap();
    let (a, b) = monotone_pair_check(&TestFunction::constant(&iv, 1.0), &e, &one, &one, &one, &iv).unwrap();
    let closed = rel(a.value(), 1.0 / 3.0).max(rel(b.value(), 1.0 / 3.0));
    outcome(
        worst <= 1e-6 && closed <= 1e-6,
        format!("worst route gap {worst:.1e}; h = 1 gives {:.8} and {:.8}", a.value(), b.value()),
    )
}

fn discretization() -> Outcome {
    let unit = Interval64::unit();
    let half = Interval64::new(0.0, f64::INFINITY).unwrap();
    type Tail = Box<dyn Fn(f64) -> f64>;
    let cases: Vec<(&str, Weight64, Interval64, Tail)> = vec![
        ("unit", Weight64::constant(1.0), unit, Box::new(|t| 1.0 - t)),
        ("2x^0.5", Weight64::power_law(2.0, 0.5, 0.0), unit, Box::new(|t: f64| 2.0 / 1.5 * (1.0 - t.powf(1.5)))),
        ("(1-x)^-0.5", Weight64::power_law(1.0, 0.0, -0.5), unit, Box::new(|t: f64| 2.0 * (1.0 - t).sqrt())),
        (
            "steps",
            Weight64::piecewise_constant(vec![0.3, 0.7], vec![1.0, 3.0, 0.5]).unwrap(),
            unit,
            Box::new(|t: f64| {
                if t < 0.3 {
                    (0.3 - t) + 1.2 + 0.15
                } else if t < 0.7 {
                    3.0 * (0.7 - t) + 0.15
                } else {
                    0.5 * (1.0 - t)
                }
            }),
        ),
        (
            "half-line steps",
            Weight64::piecewise_constant(vec![1.0, 3.0], vec![2.0, 0.5, 0.0]).unwrap(),
            half,
            Box::new(|t: f64| if t < 1.0 { 2.0 * (1.0 - t) + 1.0 } else if t < 3.0 { 0.5 * (3.0 - t) } else { 0.0 }),
        ),
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, w, iv, tail) in &cases {
        let ds = build_discretizing_sequence(w, iv, 20).unwrap();
        for (k, x, _) in ds.iter() {
            if Some(k) == ds.n() {
                continue;
            }
            worst = worst.max((tail(x) * 2f64.powi(k as i32) - 1.0).abs());
            count += 1;
        }
    }
    let ds = build_discretizing_sequence(&Weight64::constant(1.0), &unit, 20).unwrap();
    let closed = ds.iter().map(|(k, x, _)| (x - (1.0 - 2f64.powi(-(k as i32)))).abs()).fold(0.0, f64::max);
    outcome(
        worst <= 1e-8 && closed <= 1e-10,
        format!("worst |W*(x_k) 2^k - 1| = {worst:.1e} over {count} points; unit-weight point error {closed:.1e}"),
    )
}

fn lemma_ratio(kind: LemmaKind, r: &mut rand_chacha::ChaCha8Rng, depth: usize) -> Option<(f64, f64)> {
    let iv = Interval64::unit();
    let alpha = r.gen_range(0.25..2.0);
    match kind {
        LemmaKind::SupSum | LemmaKind::SumSum | LemmaKind::SumSup => {
            let len = 40;
            let ratios: Vec<f64> = (0..2 * len).map(|_| r.gen_range(0.1..0.75)).collect();
            let vals: Vec<f64> = (0..2 * len).map(|_| r.gen_range(0.0..1.0)).collect();
            let run = |n: usize| {
                let mut tau = vec![1.0];
                for k in 1..n {
                    tau.push(tau[k - 1] * ratios[k]);
                }
                let a = NonNegSequence::new(0, vals[..n].to_vec()).unwrap();
                lemma_pair(kind, &LemmaInput::Sequence { tau: &tau, a: &a, alpha }).unwrap().ratio().value()
            };
            Some((run(len), run(2 * len)))
        }
        LemmaKind::DecSupSum | LemmaKind::DecSumSum | LemmaKind::DecSumSup | LemmaKind::ThreeSup | LemmaKind::ThreeSum => {
            let (mut g, _, _) = power_weights(r, 2.0);
            if kind == LemmaKind::DecSumSup {
                // Sups of an unbounded g are infinite on both sides, which says nothing.
                if let Weight64::PowerLaw { c, alpha, beta } = g {
                    g = Weight64::power_law(c, alpha.abs(), beta.abs());
                }
            }
            let ratios: Vec<f64> = (0..2 * depth + 1).map(|_| r.gen_range(0.1..0.75)).collect();
            let shrink: Vec<f64> = (0..2 * depth + 1).map(|_| r.gen_range(0.6..0.85)).collect();
            let sig: Vec<f64> = (0..2 * depth + 1).map(|_| r.gen_range(0.0..1.0)).collect();
            let three = matches!(kind, LemmaKind::ThreeSup | LemmaKind::ThreeSum);
            let run = |n: usize| {
                let mut tau = vec![1.0];
                for k in 1..n {
                    tau.push(tau[k - 1] * ratios[k]);
                }
                let mut points = vec![0.0];
                let mut prod = 1.0;
                for s in shrink.iter().take(n) {
                    prod *= s;
                    points.push(1.0 - prod);
                }
                let mut sigma = vec![1.0];
                for k in 1..n {
                    sigma.push(sigma[k - 1] + sig[k]);
                }
                let pts = if three { &points[1..] } else { &points[..] };
                let inp = LemmaInput::Partition { tau: &tau, points: pts, g: &g, iv: &iv, alpha, sigma: &sigma };
                lemma_pair(kind, &inp).unwrap().ratio().value()
            };
            Some((run(depth), run(2 * depth)))
        }
        LemmaKind::IntEquiv | LemmaKind::SupEquiv => {
            let (w, _, _) = power_weights(r, 2.0);
            let alpha = if kind == LemmaKind::IntEquiv { r.gen_range(0.0..2.0) } else { alpha };
            let (c, gamma) = (r.gen_range(0.0..3.0), r.gen_range(0.2..2.0));
            let h = move |x: f64| 1.0 + c * x.powf(gamma);
            let ds = build_discretizing_sequence(&w, &iv, depth as i64).unwrap();
            let deep = deepen(&ds).unwrap();
            let n = ds.first_index();
            let run = |ds: &hardy_core::DiscretizingSequence64| {
                lemma_pair(kind, &LemmaInput::Discretized { ds, n, alpha, h: &h }).unwrap().ratio().value()
            };
            Some((run(&ds), run(&deep)))
        }
    }
}

fn lemmas() -> Outcome {
    let mut r = rng(9);
    let (mut lo, mut hi, mut drift) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for kind in LemmaKind::ALL {
        for i in 0..20 {
            let (a, b) = lemma_ratio(kind, &mut r, 20).unwrap();
            lo = lo.min(a);
            hi = hi.max(a);
            let d = rel(a, b);
            drift = drift.max(d);
            if !(a >= 1.0 / 64.0 && a <= 64.0 && d < 0.1) {
                bad.push(format!("{kind} #{i}: ratio {a}, deepened {b}"));
            }
        }
    }
    for b in &bad {
        println!("  violation: {b}");
    }
    outcome(
        bad.is_empty(),
        format!("200 inputs, lhs/rhs in [{lo:.3}, {hi:.3}], worst drift {:.2}%", drift * 100.0),
    )
}

/// Grid maximum of the two-term sequence ratio, from independently computed ingredients.
fn brute_force(kind: SequenceKind, e: &Exponents64, u: &Weight64, v: &Weight64, ds: &hardy_core::DiscretizingSequence64) -> f64 {
    let iv = *ds.interval();
    let x = ds.points();
    let k0 = ds.first_index();
    let he = HardyExponents64::new(e.p, e.q).unwrap();
    let b: Vec<f64> = (0..2).map(|j| local_hardy_constant(&he, u, v, &iv, x[j], x[j + 1]).unwrap().value()).collect();
    let vl: Vec<f64> = (0..2).map(|j| vp(v, &iv, e.p, x[j], x[j + 1]).unwrap().value()).collect();
    let u1 = integrate(u, &iv, x[1], x[2], 1e-12).unwrap().value();
    let two = |k: i64| 2f64.powi(-(k as i32));
    let mut best = 0.0f64;
    for i in 0..200 {
        for j in 0..200 {
            let a = [i as f64 / 199.0, j as f64 / 199.0];
            let norm = (a[0].powf(e.p) + a[1].powf(e.p)).powf(1.0 / e.p);
            if norm == 0.0 {
                continue;
            }
            let lhs = match kind {
                SequenceKind::Bk => (0..2).map(|m| two(k0 + 1 + m as i64) * (a[m] * b[m]).powf(e.r)).sum::<f64>(),
                // Only U_{N+1} lies inside the ladder, so only the first partial sum contributes.
                SequenceKind::Vp => two(k0 + 1) * u1.powf(e.r / e.q) * (a[0] * vl[0]).powf(e.r),
            };
            best = best.max(lhs.powf(1.0 / e.r) / norm);
        }
    }
    best
}

fn discrete_vs_continuous() -> Outcome {
    let mut r = rng(10);
    let (mut lo, mut hi, mut drift) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for regime in REGIMES {
        for i in 0..5 {
            let c = config(&mut r, regime);
            let cont = continuous_constants(&c.e, &c.u, &c.v, &c.w, &c.iv).unwrap().combined.value();
            let ds = build_discretizing_sequence(&c.w, &c.iv, 20).unwrap();
            let d1 = discrete_constants(&c.e, &c.u, &c.v, &ds).unwrap().combined.value();
            let d2 = discrete_constants(&c.e, &c.u, &c.v, &deepen(&ds).unwrap()).unwrap().combined.value();
            let ratio = d1 / cont;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            drift = drift.max(rel(d1, d2));
            if !((1.0 / 256.0..=256.0).contains(&ratio) && rel(d1, d2) < 0.01) {
                bad.push(format!("{regime} #{i}: discrete {d1}, deepened {d2}, continuous {cont}: {c:?}"));
            }
        }
    }
    let iv = Interval64::unit();
    let mut small = 0.0f64;
    for (p, q, rr) in [(2.0, 2.0, 2.0), (3.0, 2.0, 1.0), (2.0, 3.0, 1.5)] {
        let e = Exponents64::new(p, q, rr).unwrap();
        let (u, v, w) = power_weights(&mut r, p);
        let n = build_discretizing_sequence(&w, &iv, 40).unwrap().first_index();
        let ds = build_discretizing_sequence(&w, &iv, n + 2).unwrap();
        assert_eq!(ds.points().len(), 3);
        for kind in [SequenceKind::Bk, SequenceKind::Vp] {
            let ca = discrete_best_constant(kind, &e, &u, &v, &ds, 20_000).unwrap().value.value();
            let bf = brute_force(kind, &e, &u, &v, &ds);
            small = small.max(rel(ca, bf));
            if rel(ca, bf) > 0.01 {
                bad.push(format!("small instance {kind} ({p}, {q}, {rr}): ascent {ca}, grid {bf}"));
            }
        }
    }
    for b in &bad {
        println!("  violation: {b}");
    }
    outcome(
        bad.is_empty(),
        format!(
            "discrete/continuous in [{lo:.3}, {hi:.3}], deepening drift {:.3}%, two-interval gap {:.2}%",
            drift * 100.0,
            small * 100.0
        ),
    )
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {n:>2} {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
    o.pass
}

fn main() {
    let mut ok = true;
    ok &= run(1, "closed-form anchor", c1_anchor);
    ok &= run(2, "homogeneity", homogeneity);
    match catch_unwind(family) {
        Ok((rows, took)) => {
            ok &= run(3, "equivalence soundness", || soundness(&rows, took));
            ok &= run(4, "equivalence saturation", || saturation(&rows));
        }
        Err(_) => {
            ok &= run(3, "equivalence soundness", || outcome(false, "family evaluation panicked"));
            ok &= run(4, "equivalence saturation", || outcome(false, "family evaluation panicked"));
        }
    }
    ok &= run(5, "degeneracy detection", degeneracy);
    ok &= run(6, "Fubini identity", fubini);
    ok &= run(7, "monotone reduction", monotone);
    ok &= run(8, "discretization", discretization);
    ok &= run(9, "lemma suite", lemmas);
    ok &= run(10, "discrete vs continuous", discrete_vs_continuous);
    if !ok {
        std::process::exit(1);
    }
}
