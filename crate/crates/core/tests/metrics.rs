use bibieq::metrics::{
    block_ler, engine_gap, gap_growth, gmean_separation, per_round_ler, pseudo_threshold, wilson, wls_alpha_fit,
    Curve, FitPoint, SweepRecord, Z95,
};
use bibieq::seeds;
use proptest::prelude::*;
use rand::Rng;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn curve(es: &[f64], f: impl Fn(f64) -> f64) -> Curve {
    es.iter().map(|&e| (e, f(e))).collect()
}

fn record(errors: usize, shots: usize, discards: usize) -> SweepRecord {
    SweepRecord {
        code: "bb72".into(),
        schedule: "2EC".into(),
        engine: "exact".into(),
        e_index: 0,
        e: 0.01,
        p: 0.001,
        q: 0.01,
        rounds: 6,
        instances: 1,
        shots,
        errors,
        discards,
        per_observable: String::new(),
        seed: 1,
        status: "ok".into(),
    }
}

#[test]
fn block_rate_examples() {
    let r = block_ler(&record(37, 1_000_000, 0)).unwrap();
    assert!((r.value - 3.7e-5).abs() < 1e-18);
    assert!(r.lo < r.value && r.value < r.hi);
    let zero = block_ler(&record(0, 500, 0)).unwrap();
    assert_eq!((zero.value, zero.lo), (0.0, 0.0));
    assert!(zero.hi > 0.0);
    let discarded = block_ler(&record(3, 100, 40)).unwrap();
    assert!((discarded.value - 0.05).abs() < 1e-15);
    assert!(block_ler(&record(0, 10, 10)).is_err());
}

/// Empirical coverage of the Wilson interval over synthetic binomial draws.
#[test]
fn wilson_interval_covers() {
    let mut rng = seeds::rng(44);
    for &(p, n) in &[(0.02, 400usize), (0.2, 100), (0.5, 50), (0.005, 2000)] {
        let trials = 4000;
        let mut covered = 0;
        for _ in 0..trials {
            let k = (0..n).filter(|_| rng.gen_bool(p)).count();
            let r = wilson(k, n, Z95).unwrap();
            if r.lo <= p && p <= r.hi {
                covered += 1;
            }
        }
        let cov = covered as f64 / trials as f64;
        assert!(cov > 0.92, "p={p} n={n}: coverage {cov}");
    }
}

#[test]
fn per_round_examples() {
    assert_eq!(per_round_ler(0.0, 6), 0.0);
    assert_eq!(per_round_ler(0.3, 1), 0.3);
    let want = 1.0 - 0.94f64.powf(1.0 / 6.0);
    assert!((per_round_ler(0.06, 6) - want).abs() < 1e-15);
}

#[test]
fn gap_and_growth_power_laws() {
    let es = log_grid(3e-3, 2e-2, 8);
    let exact = curve(&es, |e| 5.0 * e * e);
    for s in [1.3, 0.02, 0.0] {
        let approx = curve(&es, |e| 5.0 * e * e * 7.0 * e.powf(s));
        let rho = engine_gap(&approx, &exact).unwrap();
        let growth = gap_growth(&rho).unwrap();
        for (_, g) in growth {
            assert!((g - s).abs() < 1e-10, "{g} vs {s}");
        }
    }
    let doubled = curve(&es, |e| 10.0 * e * e);
    for (_, r) in engine_gap(&doubled, &exact).unwrap() {
        assert!((r - 2.0).abs() < 1e-12);
    }
}

#[test]
fn zero_denominator_points_are_dropped() {
    let exact = vec![(0.01, 0.0), (0.02, 0.1)];
    let approx = vec![(0.01, 0.05), (0.02, 0.2)];
    let rho = engine_gap(&approx, &exact).unwrap();
    assert_eq!(rho.len(), 1);
    assert!((rho[0].1 - 2.0).abs() < 1e-15);
}

#[test]
fn separation_examples() {
    let es = log_grid(1e-3, 1e-2, 5);
    let b = curve(&es, |e| e * e);
    let a = curve(&es, |e| 30.0 * e * e);
    assert!((gmean_separation(&a, &b).unwrap() - 30.0).abs() < 1e-10);
    assert!((gmean_separation(&b, &b).unwrap() - 1.0).abs() < 1e-15);
    let c = vec![(0.1, 0.4), (0.2, 0.1), (0.3, 0.9)];
    let d = vec![(0.1, 0.1), (0.2, 0.3), (0.3, 0.2)];
    let direct = (4.0 * (1.0 / 3.0) * 4.5f64).powf(1.0 / 3.0);
    assert!((gmean_separation(&c, &d).unwrap() - direct).abs() < 1e-12);
    assert!(gmean_separation(&vec![(0.1, 0.0)], &vec![(0.1, 0.1)]).is_err());
}

#[test]
fn pseudo_threshold_brackets() {
    let es = log_grid(1e-3, 5e-2, 9);
    for e0 in [2e-3, 7.3e-3, 1.05e-2, 4e-2] {
        let ehat = pseudo_threshold(&curve(&es, |e| e * e / e0)).unwrap();
        assert!((ehat / e0 - 1.0).abs() < 1e-12, "{ehat} vs {e0}");
    }
    assert!(pseudo_threshold(&curve(&es, |e| e * 1e-3)).is_err());
    assert!(pseudo_threshold(&curve(&es, |e| e * 10.0)).is_err());
}

fn synthetic_points(alpha: f64, a: f64, e_hat: f64, es: &[f64], ds: &[usize]) -> Vec<FitPoint> {
    es.iter()
        .flat_map(|&e| ds.iter().map(move |&d| FitPoint { e, d, pl: a * (e / e_hat).powf(alpha * d as f64), n_eff: 500.0 }))
        .collect()
}

#[test]
fn exact_power_law_recovers_alpha() {
    let es = log_grid(2e-3, 8e-3, 4);
    let pts = synthetic_points(0.8, 0.3, 1e-2, &es, &[6, 10, 12]);
    let fit = wls_alpha_fit(&pts, 1e-2).unwrap();
    assert_eq!(fit.alpha_per_e.len(), 4);
    for pe in &fit.alpha_per_e {
        assert!((pe.alpha - 0.8).abs() < 1e-10);
        assert!((pe.a - 0.3).abs() < 1e-10);
    }
    assert!((fit.pooled_alpha - 0.8).abs() < 1e-10);
}

#[test]
fn points_above_threshold_and_zero_counts_are_excluded() {
    let mut pts = synthetic_points(0.7, 0.2, 1e-2, &[3e-3, 5e-3], &[6, 10]);
    pts.push(FitPoint { e: 2e-2, d: 6, pl: 0.5, n_eff: 100.0 });
    pts.push(FitPoint { e: 3e-3, d: 12, pl: 0.0, n_eff: 100.0 });
    let fit = wls_alpha_fit(&pts, 1e-2).unwrap();
    assert_eq!(fit.points_used.len(), 4);
    assert_eq!(fit.censored, vec![(3e-3, 12)]);
    assert!((fit.pooled_alpha - 0.7).abs() < 1e-10);
    assert!(wls_alpha_fit(&pts[..1], 1e-2).is_err());
}

/// Closed-form OLS slope for `y = a + b x`.
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

proptest! {
    #[test]
    fn per_round_inverts_and_is_monotone(p in 0.0f64..0.999, q in 0.0f64..0.999, d in 1usize..30) {
        let r = per_round_ler(p, d);
        prop_assert!((1.0 - (1.0 - r).powi(d as i32) - p).abs() < 1e-12);
        if p <= q {
            prop_assert!(per_round_ler(p, d) <= per_round_ler(q, d));
        }
        prop_assert!(per_round_ler(p, d + 1) <= r + 1e-15);
    }

    #[test]
    fn ratios_ignore_common_rescaling(vals in prop::collection::vec((0.001f64..1.0, 0.001f64..1.0), 3..8), c in 0.01f64..100.0) {
        let es = log_grid(1e-3, 1e-2, vals.len());
        let a: Curve = es.iter().zip(&vals).map(|(&e, v)| (e, v.0)).collect();
        let b: Curve = es.iter().zip(&vals).map(|(&e, v)| (e, v.1)).collect();
        let ac: Curve = a.iter().map(|&(e, v)| (e, c * v)).collect();
        let bc: Curve = b.iter().map(|&(e, v)| (e, c * v)).collect();
        let g1 = gmean_separation(&a, &b).unwrap();
        let g2 = gmean_separation(&ac, &bc).unwrap();
        prop_assert!((g1 / g2 - 1.0).abs() < 1e-10);
        let r1 = engine_gap(&a, &b).unwrap();
        let r2 = engine_gap(&ac, &bc).unwrap();
        for (x, y) in r1.iter().zip(&r2) {
            prop_assert!((x.1 / y.1 - 1.0).abs() < 1e-10);
        }
        let shifted: Curve = r1.iter().map(|&(e, v)| (e, c * v)).collect();
        for (x, y) in gap_growth(&r1).unwrap().iter().zip(&gap_growth(&shifted).unwrap()) {
            prop_assert!((x.1 - y.1).abs() < 1e-9);
        }
    }

    #[test]
    fn equal_weights_match_ols(ys in prop::collection::vec(-12.0f64..-1.0, 3..7), w in 1.0f64..1000.0) {
        let e = 5e-3;
        let e_hat = 1e-2;
        let pts: Vec<FitPoint> = ys.iter().enumerate()
            .map(|(i, &y)| FitPoint { e, d: 4 + 2 * i, pl: y.exp(), n_eff: w })
            .collect();
        let fit = wls_alpha_fit(&pts, e_hat).unwrap();
        let x: Vec<f64> = pts.iter().map(|p| p.d as f64).collect();
        let slope = ols_slope(&x, &ys);
        prop_assert!((fit.alpha_per_e[0].alpha - slope / (e / e_hat).ln()).abs() < 1e-9);
    }

    #[test]
    fn two_distances_fit_exactly(y1 in -10.0f64..-1.0, y2 in -10.0f64..-1.0, w1 in 1.0f64..100.0, w2 in 1.0f64..100.0) {
        let pts = vec![
            FitPoint { e: 4e-3, d: 6, pl: y1.exp(), n_eff: w1 },
            FitPoint { e: 4e-3, d: 10, pl: y2.exp(), n_eff: w2 },
        ];
        let fit = wls_alpha_fit(&pts, 1e-2).unwrap();
        let slope = (y2 - y1) / 4.0;
        let pe = &fit.alpha_per_e[0];
        prop_assert!((pe.alpha * (0.4f64).ln() - slope).abs() < 1e-10);
        prop_assert!((pe.log_a + 6.0 * slope - y1).abs() < 1e-10);
    }
}
