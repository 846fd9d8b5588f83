use phaselock::coupling::{
    compute_kc, construct_fixed_point, default_eps, enumerate_fixed_points, existence_at,
    existence_with_signs, iteration_budget, radical_mean, tangency_sides, upper_bound, SignVector,
    DEFAULT_MAX_N,
};
use phaselock::frequencies::{center, sample_normal};
use proptest::prelude::*;

/// Independent route to k_c: minimise u/P(u) over u > ‖Ω‖∞ by dense grid plus golden section.
fn kc_by_minimisation(omega: &[f64]) -> f64 {
    let m = omega.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
    let ratio = |u: f64| {
        let p: f64 = omega
            .iter()
            .map(|w| (1.0 - (w / u).powi(2)).max(0.0).sqrt())
            .sum::<f64>()
            / omega.len() as f64;
        u / p
    };
    let (lo, hi) = (m * (1.0 + 1e-12), 2.0 * m);
    let grid = 4000;
    let best = (0..=grid)
        .map(|i| lo + (hi - lo) * i as f64 / grid as f64)
        .min_by(|a, b| ratio(*a).total_cmp(&ratio(*b)))
        .unwrap();
    let h = (hi - lo) / grid as f64;
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ratio(c) < ratio(d) {
            b = d;
        } else {
            a = c;
        }
    }
    ratio(0.5 * (a + b))
}

fn pairwise_field(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    x.iter()
        .map(|xi| x.iter().map(|xj| (xj - xi).sin()).sum::<f64>() / n)
        .collect()
}

fn freq_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich_and_two_sided_bound(omega in freq_vec()) {
        let spec = center(&omega).unwrap();
        prop_assume!(spec.inf_norm() > 1e-9);
        let r = compute_kc(&spec, default_eps(&spec)).unwrap();
        let tol = 1e-8 * r.kc;
        prop_assert!(r.kc >= spec.inf_norm().max(2.0 * spec.sigma()) - tol);
        prop_assert!(r.kc <= upper_bound(&spec).unwrap() + tol);
        prop_assert!(r.kc <= 2.0 * spec.inf_norm() + tol);
        prop_assert!(r.u_star > spec.inf_norm());
        prop_assert!(r.u_star <= std::f64::consts::SQRT_2 * spec.inf_norm() * (1.0 + 1e-12));
        prop_assert!(r.iterations <= iteration_budget(spec.inf_norm(), r.tolerance));
    }

    #[test]
    fn kc_agrees_with_direct_minimisation(omega in freq_vec()) {
        let spec = center(&omega).unwrap();
        prop_assume!(spec.inf_norm() > 1e-6);
        let r = compute_kc(&spec, default_eps(&spec)).unwrap();
        let brute = kc_by_minimisation(spec.centered());
        prop_assert!((r.kc - brute).abs() <= 1e-8 * brute, "{} vs {}", r.kc, brute);
    }

    #[test]
    fn scaling_covariance(omega in freq_vec(), c in prop_oneof![-8.0..-0.125f64, 0.125..8.0f64]) {
        let spec = center(&omega).unwrap();
        prop_assume!(spec.inf_norm() > 1e-6);
        let scaled = center(&omega.iter().map(|w| c * w).collect::<Vec<_>>()).unwrap();
        let a = compute_kc(&spec, default_eps(&spec)).unwrap().kc;
        let b = compute_kc(&scaled, default_eps(&scaled)).unwrap().kc;
        prop_assert!((b - c.abs() * a).abs() <= 1e-9 * b);
    }

    #[test]
    fn tangency_equation_has_single_sign_change(omega in freq_vec()) {
        let spec = center(&omega).unwrap();
        prop_assume!(spec.inf_norm() > 1e-6);
        let m = spec.inf_norm();
        let grid: Vec<(f64, f64)> = (1..=400)
            .map(|i| tangency_sides(&spec, m * (1.0 + (std::f64::consts::SQRT_2 - 1.0) * i as f64 / 400.0)))
            .collect();
        for w in grid.windows(2) {
            // in u, v = 2P rises and w = mean(1/p) falls
            prop_assert!(w[1].0 >= w[0].0, "v not increasing");
            prop_assert!(w[1].1 <= w[0].1, "w not decreasing");
        }
        let changes = grid.windows(2).filter(|w| (w[0].0 > w[0].1) != (w[1].0 > w[1].1)).count();
        prop_assert!(changes <= 1);
        // at √2‖Ω‖∞ the inequality v ≥ w holds
        let (v, w) = grid.last().copied().unwrap();
        prop_assert!(v >= w * (1.0 - 1e-12));
    }

    #[test]
    fn threshold_dichotomy(seed in 0u64..10_000, n in 2usize..40) {
        let spec = sample_normal(n, 0.0, 1.0, seed).unwrap();
        let eps_rel = 1e-10;
        let kc = compute_kc(&spec, eps_rel * spec.inf_norm()).unwrap().kc;
        prop_assert!(existence_at(&spec, kc * (1.0 - 10.0 * eps_rel)).unwrap().is_none());
        prop_assert!(existence_at(&spec, kc * (1.0 + 10.0 * eps_rel)).unwrap().is_some());
    }

    #[test]
    fn certificates_agree_with_pairwise_field(seed in 0u64..10_000, n in 2usize..7, boost in 1.01..5.0f64) {
        let spec = sample_normal(n, 0.0, 1.0, seed).unwrap();
        let kc = compute_kc(&spec, default_eps(&spec)).unwrap().kc;
        let k = boost * kc;
        let e = enumerate_fixed_points(&spec, k, DEFAULT_MAX_N).unwrap();
        prop_assert_eq!(e.rejected, 0);
        prop_assert!(!e.certificates.is_empty());
        for c in &e.certificates {
            let f = pairwise_field(c.x_star.as_slice());
            let res = f.iter().zip(spec.centered()).fold(0.0_f64, |m, (fi, w)| m.max((k * fi + w).abs()));
            prop_assert!(res <= 1e-8 * k.max(1.0));
            prop_assert!((c.order_r - c.beta).abs() <= 1e-8);
            prop_assert!(c.beta >= spec.inf_norm() / k);
            let margin = c.beta * c.beta * (1.0 - c.beta * c.beta) - (spec.sigma() / k).powi(2);
            prop_assert!(margin >= -1e-10);
        }
    }
}

#[test]
fn all_plus_roots_agree_with_existence_at() {
    for seed in 0..50 {
        let spec = sample_normal(12, 0.0, 1.0, seed).unwrap();
        let kc = compute_kc(&spec, default_eps(&spec)).unwrap().kc;
        for boost in [1.001, 1.2, 3.0] {
            let k = kc * boost;
            let roots = existence_with_signs(&spec, k, &SignVector::all_plus(12)).unwrap();
            assert_eq!(roots[0], existence_at(&spec, k).unwrap().unwrap());
        }
    }
}

#[test]
fn even_extremal_family() {
    for n in [2usize, 4, 10, 50] {
        for c in [0.3, 1.0, 4.0] {
            let omega: Vec<f64> = (0..n).map(|i| if i < n / 2 { c } else { -c }).collect();
            let spec = center(&omega).unwrap();
            let eps = default_eps(&spec);
            let r = compute_kc(&spec, eps).unwrap();
            assert!((r.kc - 2.0 * c).abs() <= 1e-9 * c, "n={} c={} kc={}", n, c, r.kc);
            assert_eq!(r.upper, f64::INFINITY);
        }
    }
}

#[test]
fn single_outlier_family_approaches_lower_bound() {
    let n = 1001;
    let mut omega = vec![0.0; n];
    omega[n - 1] = 1.0;
    let spec = center(&omega).unwrap();
    let r = compute_kc(&spec, default_eps(&spec)).unwrap();
    assert!(r.kc / spec.inf_norm() < 1.1, "ratio {}", r.kc / spec.inf_norm());
    let small = center(&[0.0, 0.0, 1.0]).unwrap();
    let r3 = compute_kc(&small, default_eps(&small)).unwrap();
    assert!(r3.kc / small.inf_norm() > r.kc / spec.inf_norm());
}

#[test]
fn mixed_sign_certificates_exist_under_strong_coupling() {
    let spec = sample_normal(5, 0.0, 1.0, 17).unwrap();
    let k = 50.0 * upper_bound(&spec).unwrap();
    let mixed: usize = (1..31u64)
        .map(|code| {
            let a = SignVector::from_code(5, code);
            existence_with_signs(&spec, k, &a)
                .unwrap()
                .into_iter()
                .filter(|&b| construct_fixed_point(&spec, k, &a, b).is_ok())
                .count()
        })
        .sum();
    assert!(mixed >= 15, "mixed-sign certificates: {}", mixed);
    assert!((radical_mean(&spec, k) - 1.0).abs() < 1e-3);
}
