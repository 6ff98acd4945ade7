//! Closed forms checked against independent numerical or Monte Carlo
//! computations.

use coopsim::analysis::{
    i1, i2, integrate, mgf_quadrature_oracle, q_function, upep_ncc, upep_parc,
};
use coopsim::channel::{build_link_budget, draw_realization, LinkBudget};
use coopsim::relay::{inverse_means, mgf_selected, select_ncc, select_parc, SelectionMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

mod common;

use common::{factors, ncc_oracle_args, parc_oracle_args, random_args, random_budget, random_ncc_pattern, rel};

#[test]
fn q_function_matches_integrated_gaussian_tail() {
    let tail = |x: f64| {
        integrate(|t| (-t * t / 2.0).exp() / (2.0 * PI).sqrt(), x, x + 40.0, 1e-14, 0.0).unwrap()
    };
    for x in [0.0, 0.5, 1.7, 3.0, 5.0] {
        assert!(rel(q_function(x), tail(x)) < 1e-10, "x = {x}");
    }
    assert!((q_function(3.0) - 1.3499e-3).abs() < 1e-7);
    assert!((q_function(-1.7) - (1.0 - q_function(1.7))).abs() < 1e-15);
}

#[test]
fn i1_matches_its_defining_integral() {
    let direct = integrate(
        |t| {
            let s = t.sin().powi(2);
            s * s / ((s + 3.0) * (s + 4.0)) / PI
        },
        0.0,
        FRAC_PI_2,
        1e-14,
        0.0,
    )
    .unwrap();
    assert!((i1(3.0, 4.0).unwrap() - direct).abs() < 1e-10);
}

#[test]
fn i1_and_i2_match_quadrature_including_near_coincident_arguments() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let v = random_args(&mut rng, 3);
        let q1 = mgf_quadrature_oracle(&factors(&v[..2]), None).unwrap();
        assert!(rel(i1(v[0], v[1]).unwrap(), q1) < 1e-9, "{v:?}");
        let q2 = mgf_quadrature_oracle(&factors(&v), None).unwrap();
        assert!(rel(i2(v[0], v[1], v[2]).unwrap(), q2) < 1e-9, "{v:?}");
    }
    for v in [[2.0, 2.0, 2.0], [5.0, 5.0, 0.0], [1.0, 1.0 + 1e-9, 1.0 - 1e-9]] {
        let q = mgf_quadrature_oracle(&factors(&v), None).unwrap();
        assert!(rel(i2(v[0], v[1], v[2]).unwrap(), q) < 1e-9, "{v:?}");
    }
}

#[test]
fn upeps_match_quadrature_on_random_budgets() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let b = random_budget(&mut rng);
        let d = rng.random_range(1..40usize);
        let d2 = rng.random_range(0..=d);
        let (direct, sel) = parc_oracle_args(&b, d, d2, 0);
        let oracle = mgf_quadrature_oracle(&direct, (d2 > 0).then_some(&sel)).unwrap();
        let closed = upep_parc(d, d2, &b, 0).unwrap();
        assert!(rel(closed, oracle) < 1e-9, "PARC d={d} d2={d2} {closed} vs {oracle}");

        let p = random_ncc_pattern(&mut rng);
        let (direct, sel) = ncc_oracle_args(&b, p);
        let oracle = mgf_quadrature_oracle(&direct, (p.2 > 0).then_some(&sel)).unwrap();
        let closed = upep_ncc(p, &b).unwrap();
        assert!(rel(closed, oracle) < 1e-9, "NCC {p:?} {closed} vs {oracle}");
    }
}

/// Mean and standard error of `Q(sqrt(2 gamma_total))` over fading draws.
fn mc_pep<F: FnMut(&mut ChaCha8Rng) -> f64>(draws: usize, seed: u64, mut total_snr: F) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let q = q_function((2.0 * total_snr(&mut rng)).sqrt());
        s += q;
        s2 += q * q;
    }
    let m = s / draws as f64;
    (m, ((s2 / draws as f64 - m * m) / draws as f64).sqrt())
}

#[test]
fn parc_upep_matches_monte_carlo() {
    let b = build_link_budget(0.0, 2, 3.5, 0.5).unwrap();
    let (d, d2) = (7, 4);
    let (m, se) = mc_pep(400_000, 5, |rng| {
        let r = draw_realization(&b, rng);
        d as f64 * r.sd(0) + d2 as f64 * select_parc(&r, 0).gamma
    });
    let closed = upep_parc(d, d2, &b, 0).unwrap();
    assert!((m - closed).abs() < 3.0 * se, "{m} +- {se} vs {closed}");
}

#[test]
fn ncc_upep_matches_monte_carlo() {
    let b = build_link_budget(0.0, 3, 3.5, 0.5).unwrap();
    let (m, se) = mc_pep(400_000, 6, |rng| {
        let r = draw_realization(&b, rng);
        5.0 * r.sd(0) + 7.0 * r.sd(1) + 5.0 * select_ncc(&r).gamma
    });
    let closed = upep_ncc((5, 7, 5), &b).unwrap();
    assert!((m - closed).abs() < 3.0 * se, "{m} +- {se} vs {closed}");
}

#[test]
fn selected_channel_mgf_matches_monte_carlo() {
    let b = LinkBudget::from_parts([1.0, 1.0], vec![[2.0, 7.0], [5.0, 1.5], [0.5, 9.0]], vec![3.0, 4.0, 6.0])
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 200_000;
    for s in [0.1, 1.0, 4.0] {
        let (mut acc, mut acc2) = (0.0, 0.0);
        for _ in 0..n {
            let r = draw_realization(&b, &mut rng);
            let v = (-s * select_ncc(&r).gamma).exp();
            acc += v;
            acc2 += v * v;
        }
        let m = acc / n as f64;
        let se = ((acc2 / n as f64 - m * m) / n as f64).sqrt();
        let closed = mgf_selected(&b, SelectionMode::Ncc, s).unwrap();
        assert!((m - closed).abs() < 4.0 * se, "s = {s}: {m} +- {se} vs {closed}");
    }
}

#[test]
fn selected_channel_cdf_is_product_of_exponential_cdfs() {
    let b = build_link_budget(3.0, 3, 3.5, 0.5).unwrap();
    let rates = inverse_means(&b, SelectionMode::Parc { source: 1 });
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 100_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| select_parc(&draw_realization(&b, &mut rng), 1).gamma)
        .collect();
    for x in [0.5, 2.0, 8.0, 20.0] {
        let empirical = samples.iter().filter(|&&g| g <= x).count() as f64 / n as f64;
        let cdf: f64 = rates.iter().map(|r| 1.0 - (-r * x).exp()).product();
        let se = (cdf * (1.0 - cdf) / n as f64).sqrt();
        assert!((empirical - cdf).abs() < 4.0 * se + 1e-4, "x = {x}: {empirical} vs {cdf}");
    }
}

#[test]
fn link_snrs_are_exponential_with_budget_means() {
    let b = build_link_budget(5.0, 2, 3.5, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 50_000;
    let draws: Vec<_> = (0..n).map(|_| draw_realization(&b, &mut rng)).collect();
    for link in b.links() {
        let mean = b.gamma_bar(link).unwrap();
        let mut x: Vec<f64> = draws.iter().map(|r| r.gamma(link) / mean).collect();
        let m = x.iter().sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 4.0 / (n as f64).sqrt(), "{link}: mean {m}");
        // Kolmogorov-Smirnov against Exp(1); 1.63 / sqrt(n) is the 1% level.
        x.sort_by(f64::total_cmp);
        let ks = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = 1.0 - (-v).exp();
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.63 / (n as f64).sqrt(), "{link}: KS {ks}");
    }
}
