//! Max-min relay selection and the MGF of the selected equivalent channel.

use crate::channel::{ChannelRealization, LinkBudget, MAX_RELAYS};
use crate::dd::Dd;
use crate::error::{invalid, Result};

/// Outcome of a selection: 0-based relay index and its equivalent SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub relay: usize,
    pub gamma: f64,
}

/// Which equivalent channel a relay is judged by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// PARC for one source: min(gamma_SR, gamma_RD).
    Parc { source: usize },
    /// NCC: min(gamma_S1R, gamma_S2R, gamma_RD).
    Ncc,
}

/// Per-relay equivalent SNRs (instantaneous) or their means.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannelSet {
    pub values: Vec<f64>,
}

impl EquivalentChannelSet {
    pub fn instantaneous(r: &ChannelRealization, mode: SelectionMode) -> Self {
        let values = (0..r.n_relays())
            .map(|j| match mode {
                SelectionMode::Parc { source } => r.sr(source, j).min(r.rd(j)),
                SelectionMode::Ncc => r.sr(0, j).min(r.sr(1, j)).min(r.rd(j)),
            })
            .collect();
        Self { values }
    }

    /// Mean of each equivalent channel: the minimum of independent
    /// exponentials is exponential with the summed rate.
    pub fn means(budget: &LinkBudget, mode: SelectionMode) -> Self {
        let values = inverse_means(budget, mode).into_iter().map(|r| 1.0 / r).collect();
        Self { values }
    }

    /// Lowest-index argmax.
    pub fn best(&self) -> Selection {
        let mut best = Selection {
            relay: 0,
            gamma: self.values[0],
        };
        for (j, &g) in self.values.iter().enumerate().skip(1) {
            if g > best.gamma {
                best = Selection { relay: j, gamma: g };
            }
        }
        best
    }
}

/// Relay maximizing min(gamma_SR, gamma_RD) for `source`.
pub fn select_parc(r: &ChannelRealization, source: usize) -> Selection {
    EquivalentChannelSet::instantaneous(r, SelectionMode::Parc { source }).best()
}

/// Relay maximizing min(gamma_S1R, gamma_S2R, gamma_RD).
pub fn select_ncc(r: &ChannelRealization) -> Selection {
    EquivalentChannelSet::instantaneous(r, SelectionMode::Ncc).best()
}

/// Per-relay inverse mean of the equivalent channel (sum of the inverse
/// means of its links). A muted link gives an infinite rate.
pub fn inverse_means(budget: &LinkBudget, mode: SelectionMode) -> Vec<f64> {
    (0..budget.n_relays())
        .map(|j| {
            let links: &[f64] = match mode {
                SelectionMode::Parc { source } => &[budget.sr(source, j), budget.rd(j)],
                SelectionMode::Ncc => &[budget.sr(0, j), budget.sr(1, j), budget.rd(j)],
            };
            links.iter().map(|g| 1.0 / g).sum()
        })
        .collect()
}

/// One inclusion-exclusion term `sign / (1 + s / rate)` of the MGF of the
/// maximum of independent exponentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetMgfTerm {
    pub sign: f64,
    pub rate: f64,
}

impl SubsetMgfTerm {
    /// Mean of the exponential this term belongs to.
    pub fn mean(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn mgf(&self, s: f64) -> f64 {
        self.sign / (1.0 + s / self.rate)
    }
}

/// One term per non-empty subset of relays, in subset-mask order.
pub fn subset_terms(rates: &[f64]) -> Result<Vec<SubsetMgfTerm>> {
    if rates.is_empty() || rates.len() > MAX_RELAYS {
        return invalid(format!(
            "number of relays must be in 1..={MAX_RELAYS}, got {}",
            rates.len()
        ));
    }
    if let Some(r) = rates.iter().find(|r| !(**r > 0.0) || r.is_infinite()) {
        return invalid(format!("equivalent channel rate {r} must be positive and finite"));
    }
    Ok((1u32..1 << rates.len())
        .map(|mask| SubsetMgfTerm {
            sign: if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 },
            rate: rates
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, r)| r)
                .sum(),
        })
        .collect())
}

/// Subset terms of the selected channel under `mode`.
pub fn selected_terms(budget: &LinkBudget, mode: SelectionMode) -> Result<Vec<SubsetMgfTerm>> {
    subset_terms(&inverse_means(budget, mode))
}

/// E{exp(-s gamma_selected)}.
pub fn mgf_selected(budget: &LinkBudget, mode: SelectionMode, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return invalid(format!("MGF argument {s} must be >= 0"));
    }
    let rates = inverse_means(budget, mode);
    subset_terms(&rates)?;
    let s = Dd::from(s);
    let one = Dd::from(1.0);
    let mut total = Dd::from(0.0);
    for mask in 1u32..1 << rates.len() {
        let mut rate = Dd::from(0.0);
        for (_, r) in rates.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1) {
            rate = rate + Dd::from(*r);
        }
        let term = one / (one + s / rate);
        total = if mask.count_ones() % 2 == 1 { total + term } else { total - term };
    }
    Ok(total.to_f64())
}

/// The same MGF for `n` identical relays with equivalent mean `mean`, with
/// the subsets of equal size grouped by a binomial coefficient.
pub fn mgf_selected_symmetric(n: usize, mean: f64, s: f64) -> f64 {
    let (mean, s) = (Dd::from(mean), Dd::from(s));
    let one = Dd::from(1.0);
    let mut binom = 1.0;
    let mut total = Dd::from(0.0);
    for j in 1..=n {
        binom = binom * (n + 1 - j) as f64 / j as f64;
        let term = Dd::from(binom) / (one + mean * s / Dd::from(j as f64));
        total = if j % 2 == 1 { total + term } else { total - term };
    }
    total.to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_link_budget;

    fn parc_realization(pairs: &[(f64, f64)]) -> ChannelRealization {
        let sr: Vec<[f64; 2]> = pairs.iter().map(|p| [p.0, p.0]).collect();
        let rd: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        ChannelRealization::from_gammas([1.0, 1.0], &sr, &rd).unwrap()
    }

    #[test]
    fn max_min_by_hand() {
        let r = parc_realization(&[(10.0, 1.0), (5.0, 4.0)]);
        assert_eq!(select_parc(&r, 0), Selection { relay: 1, gamma: 4.0 });
        let r = parc_realization(&[(3.0, 7.0)]);
        assert_eq!(select_parc(&r, 0), Selection { relay: 0, gamma: 3.0 });
    }

    #[test]
    fn ncc_by_hand_and_ties() {
        let r = ChannelRealization::from_gammas([1.0, 1.0], &[[3.0, 9.0], [4.0, 4.0]], &[9.0, 4.0])
            .unwrap();
        assert_eq!(select_ncc(&r), Selection { relay: 1, gamma: 4.0 });
        let r = parc_realization(&[(2.0, 2.0), (2.0, 2.0)]);
        assert_eq!(select_ncc(&r).relay, 0);
    }

    #[test]
    fn mgf_edge_cases() {
        let b = build_link_budget(5.0, 1, 3.5, 0.5).unwrap();
        let mode = SelectionMode::Parc { source: 0 };
        assert_eq!(mgf_selected(&b, mode, 0.0).unwrap(), 1.0);
        let mean = 1.0 / (1.0 / b.sr(0, 0) + 1.0 / b.rd(0));
        let v = mgf_selected(&b, mode, 0.3).unwrap();
        assert!((v - 1.0 / (1.0 + mean * 0.3)).abs() < 1e-15);
        assert!(mgf_selected(&b, mode, -0.1).is_err());
    }

    #[test]
    fn subset_count_and_guard() {
        assert_eq!(subset_terms(&[1.0; 3]).unwrap().len(), 7);
        assert!(subset_terms(&[1.0; 17]).is_err());
        assert!(subset_terms(&[]).is_err());
        assert!(subset_terms(&[1.0, f64::INFINITY]).is_err());
    }
}
