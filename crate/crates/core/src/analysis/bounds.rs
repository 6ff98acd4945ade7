use crate::dd::Dd;
use super::integrals::product_integral;
use crate::channel::LinkBudget;
use crate::code::{CompoundSpectrum, DistanceSpectrum};
use crate::error::{invalid, Result};
use crate::relay::{inverse_means, subset_terms, SelectionMode};

/// Probability that `d2` of the `d` differing symbols fall among the `l`
/// relayed positions of an `n`-symbol codeword:
/// `C(n - l, d - d2) C(l, d2) / C(n, d)`.
pub fn pattern_prob_parc(d: usize, d2: usize, n: usize, l: usize) -> Result<f64> {
    if l > n || d > n || d2 > d || d2 > l || d - d2 > n - l {
        return invalid(format!(
            "pattern ({}, {d2}) is impossible for n = {n}, l = {l}",
            d.wrapping_sub(d2)
        ));
    }
    let d1 = d - d2;
    // d!/(d1! d2!) times falling factorials, interleaved to stay in range.
    let mut p = 1.0;
    for i in 0..d2 {
        p *= (d - i) as f64 / (d2 - i) as f64;
    }
    for i in 0..d {
        let num = if i < d1 { n - l - i } else { l - (i - d1) };
        p *= num as f64 / (n - i) as f64;
    }
    Ok(p)
}

/// Sign and mean of each inclusion-exclusion term of the selected channel.
///
/// The signed sums over these terms cancel by up to `gamma^(N_r - 1)`, so
/// subset means and the terms themselves are carried in double-double.
struct Subsets(Vec<(Dd, Dd)>);

impl Subsets {
    fn new(budget: &LinkBudget, mode: SelectionMode) -> Result<Self> {
        let rates = inverse_means(budget, mode);
        let terms = subset_terms(&rates)?;
        Ok(Subsets(
            terms
                .iter()
                .zip(1u32..)
                .map(|(t, mask)| {
                    let rate = rates
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .fold(Dd::from(0.0), |acc, (_, &r)| acc + Dd::from(r));
                    (Dd::from(t.sign), Dd::from(1.0) / rate)
                })
                .collect(),
        ))
    }

    /// `sum_S sign_S f(weight * mean_S)`.
    fn sum(&self, weight: f64, f: impl Fn(Dd) -> Dd) -> f64 {
        let w = Dd::from(weight);
        self.0
            .iter()
            .fold(Dd::from(0.0), |acc, &(sign, mean)| acc + sign * f(w * mean))
            .to_f64()
    }
}

fn dd_product(x: f64, y: f64) -> Dd {
    Dd::from(x) * Dd::from(y)
}

fn upep_parc_with(d: usize, d2: usize, gamma_sd: f64, subsets: &Subsets) -> f64 {
    let a = dd_product(d as f64, gamma_sd);
    if d2 == 0 {
        return product_integral(&[a]).to_f64();
    }
    subsets.sum(d2 as f64, |b| product_integral(&[a, b]))
}

/// Fading-averaged pairwise error probability of PARC for an error event of
/// weight `d` with `d2` symbols relayed, for `source`.
pub fn upep_parc(d: usize, d2: usize, budget: &LinkBudget, source: usize) -> Result<f64> {
    if d == 0 || d2 > d {
        return invalid(format!("invalid PARC pattern d = {d}, d2 = {d2}"));
    }
    let subsets = Subsets::new(budget, SelectionMode::Parc { source })?;
    Ok(upep_parc_with(d, d2, budget.sd(source), &subsets))
}

/// A union bound on the bit error rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BerBoundResult {
    /// `(d, contribution per information bit)`.
    pub contributions: Vec<(u32, f64)>,
    /// Bound per information bit: the sum of the contributions.
    pub total: f64,
    /// Sum over the whole K-bit block (K times `total`).
    pub raw: f64,
    pub d_max: u32,
}

impl BerBoundResult {
    fn new(contributions: Vec<(u32, f64)>, k: usize, d_max: u32) -> Self {
        let total = contributions.iter().map(|c| c.1).sum::<f64>();
        Self {
            contributions,
            total,
            raw: k as f64 * total,
            d_max,
        }
    }
}

/// Union bound for PARC: `sum_d w(d) sum_{d2} p(d, d2) P(d | d2)`.
///
/// `n` is the codeword length, `k` the number of information bits; half the
/// codeword (rounded down) is relayed. `w(d)` counts the input weight of
/// error events starting at one trellis section, so the sum is already per
/// information bit.
pub fn ber_bound_parc(
    spectrum: &DistanceSpectrum,
    budget: &LinkBudget,
    n: usize,
    k: usize,
    source: usize,
) -> Result<BerBoundResult> {
    if spectrum.iter().next().is_none() {
        return invalid("empty distance spectrum");
    }
    let subsets = Subsets::new(budget, SelectionMode::Parc { source })?;
    let l = n / 2;
    let mut contributions = Vec::new();
    for (d, w) in spectrum.iter() {
        let d = d as usize;
        let lo = d.saturating_sub(n - l);
        let mut p = 0.0;
        for d2 in lo..=d.min(l) {
            p += pattern_prob_parc(d, d2, n, l)? * upep_parc_with(d, d2, budget.sd(source), &subsets);
        }
        contributions.push((d as u32, w as f64 * p));
    }
    Ok(BerBoundResult::new(contributions, k, spectrum.d_max()))
}

fn upep_ncc_with(pattern: (u32, u32, u32), budget: &LinkBudget, subsets: &Subsets) -> f64 {
    let (d1, d2, dr) = pattern;
    let a = dd_product(d1 as f64, budget.sd(0));
    let b = dd_product(d2 as f64, budget.sd(1));
    if dr == 0 {
        return product_integral(&[a, b]).to_f64();
    }
    subsets.sum(dr as f64, |c| product_integral(&[a, b, c]))
}

/// Fading-averaged pairwise error probability of the compound code for the
/// weight pattern `(d1, d2, dR)`.
pub fn upep_ncc(pattern: (u32, u32, u32), budget: &LinkBudget) -> Result<f64> {
    let zeros = [pattern.0, pattern.1, pattern.2].iter().filter(|&&x| x == 0).count();
    if zeros >= 2 {
        return invalid(format!(
            "pattern {pattern:?} has fewer than two non-zero blocks, impossible for the compound code"
        ));
    }
    let subsets = Subsets::new(budget, SelectionMode::Ncc)?;
    Ok(upep_ncc_with(pattern, budget, &subsets))
}

/// Union bound for NCC and `source` (0 or 1):
/// `1/2 sum_W w_i(W) P(W)` over the compound spectrum.
pub fn ber_bound_ncc(
    spectrum: &CompoundSpectrum,
    budget: &LinkBudget,
    k: usize,
    source: usize,
) -> Result<BerBoundResult> {
    if spectrum.entries().is_empty() {
        return invalid("empty compound spectrum");
    }
    if source > 1 {
        return invalid(format!("source index {source} must be 0 or 1"));
    }
    let subsets = Subsets::new(budget, SelectionMode::Ncc)?;
    let mut contributions: Vec<(u32, f64)> = Vec::new();
    for e in spectrum.entries() {
        let w = if source == 0 { e.w1 } else { e.w2 };
        if w == 0 {
            continue;
        }
        let c = 0.5 * w as f64 * upep_ncc_with((e.d1, e.d2, e.dr), budget, &subsets);
        match contributions.last_mut() {
            Some(last) if last.0 == e.d => last.1 += c,
            _ => contributions.push((e.d, c)),
        }
    }
    Ok(BerBoundResult::new(contributions, k, spectrum.d_max()))
}
