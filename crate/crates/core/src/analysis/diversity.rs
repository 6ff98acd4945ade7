use crate::error::{invalid, Result};

/// Weight pattern of an error event, per scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightPattern {
    /// `(d1, d2)`: symbols heard on the direct link only, and also relayed.
    Parc { d1: u32, d2: u32 },
    /// `(d1, d2, dR)` over the two direct blocks and the network-coded block.
    Ncc { d1: u32, d2: u32, dr: u32 },
}

/// High-SNR decay exponent of the pairwise error probability of a pattern.
pub fn asymptotic_diversity(pattern: WeightPattern, n_relays: usize) -> Result<u32> {
    if n_relays == 0 {
        return invalid("at least one relay is required");
    }
    let n = n_relays as u32;
    match pattern {
        WeightPattern::Parc { d1, d2 } => match (d1, d2) {
            (0, 0) => invalid("empty PARC pattern"),
            (_, 0) => Ok(1),
            _ => Ok(n + 1),
        },
        WeightPattern::Ncc { d1, d2, dr } => {
            let zeros = [d1, d2, dr].iter().filter(|&&x| x == 0).count();
            if zeros >= 2 {
                return invalid(format!(
                    "NCC pattern ({d1}, {d2}, {dr}) needs at least two non-zero blocks"
                ));
            }
            Ok(if dr == 0 {
                2
            } else if d1 == 0 || d2 == 0 {
                n + 1
            } else {
                n + 2
            })
        }
    }
}

/// Local slope `-d ln BER / d ln SNR` at the interior points of a curve
/// given as `(SNR dB, BER)`, by central differences.
pub fn instantaneous_diversity(curve: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if curve.len() < 3 {
        return invalid(format!("need at least 3 points, got {}", curve.len()));
    }
    if let Some(p) = curve.iter().find(|p| !(p.1 > 0.0) || !p.1.is_finite() || !p.0.is_finite()) {
        return invalid(format!("BER {} at {} dB must be positive and finite", p.1, p.0));
    }
    if curve.windows(2).any(|w| w[1].0 <= w[0].0) {
        return invalid("SNR grid must be strictly increasing");
    }
    let ln_snr = |db: f64| db * std::f64::consts::LN_10 / 10.0;
    Ok(curve
        .windows(3)
        .map(|w| {
            let slope = (w[2].1.ln() - w[0].1.ln()) / (ln_snr(w[2].0) - ln_snr(w[0].0));
            (w[1].0, -slope)
        })
        .collect())
}
