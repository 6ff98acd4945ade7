//! Random parameter generators shared by the integration tests.

#![allow(dead_code)]

use coopsim::analysis::{MgfFactor, SelectedFactor};
use coopsim::channel::LinkBudget;
use coopsim::relay::{inverse_means, SelectionMode};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random arguments over several decades, a third of them nearly equal.
pub fn random_args(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let base = 10f64.powf(rng.random_range(-2.0..4.0));
    (0..n)
        .map(|_| {
            if rng.random_bool(1.0 / 3.0) {
                base * (1.0 + rng.random_range(-1e-7..1e-7))
            } else {
                10f64.powf(rng.random_range(-2.0..4.0))
            }
        })
        .collect()
}

pub fn factors(means: &[f64]) -> Vec<MgfFactor> {
    means.iter().map(|&m| MgfFactor { weight: 1.0, mean: m }).collect()
}

/// 1 to 4 relays, link SNRs between -10 and 30 dB, source links equal 30%
/// of the time.
pub fn random_budget(rng: &mut ChaCha8Rng) -> LinkBudget {
    let n = rng.random_range(1..=4);
    let g = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(-1.0..3.0));
    let sd = if rng.random_bool(0.3) {
        let x = g(rng);
        [x, x]
    } else {
        [g(rng), g(rng)]
    };
    let sr = (0..n).map(|_| [g(rng), g(rng)]).collect();
    let rd = (0..n).map(|_| g(rng)).collect();
    LinkBudget::from_parts(sd, sr, rd).unwrap()
}

pub fn random_ncc_pattern(rng: &mut ChaCha8Rng) -> (u32, u32, u32) {
    let mut p = [rng.random_range(0..20u32), rng.random_range(0..20), rng.random_range(0..20)];
    while p.iter().filter(|&&x| x == 0).count() >= 2 {
        let i = rng.random_range(0..3);
        p[i] = p[i].max(rng.random_range(1..20));
    }
    (p[0], p[1], p[2])
}

/// Oracle inputs for a PARC pattern `(d, d2)` of `source`.
pub fn parc_oracle_args(b: &LinkBudget, d: usize, d2: usize, source: usize) -> (Vec<MgfFactor>, SelectedFactor) {
    let direct = vec![MgfFactor {
        weight: d as f64,
        mean: b.sd(source),
    }];
    let sel = SelectedFactor {
        weight: d2 as f64,
        rates: inverse_means(b, SelectionMode::Parc { source }),
    };
    (direct, sel)
}

/// Oracle inputs for an NCC pattern.
pub fn ncc_oracle_args(b: &LinkBudget, p: (u32, u32, u32)) -> (Vec<MgfFactor>, SelectedFactor) {
    let direct = vec![
        MgfFactor {
            weight: p.0 as f64,
            mean: b.sd(0),
        },
        MgfFactor {
            weight: p.1 as f64,
            mean: b.sd(1),
        },
    ];
    let sel = SelectedFactor {
        weight: p.2 as f64,
        rates: inverse_means(b, SelectionMode::Ncc),
    };
    (direct, sel)
}
