//! Relay demodulation, C-MRC combining and network encoding.

use crate::channel::channel_llr;
use crate::error::{invalid, Error, Result};
use crate::Bit;

/// What a relay hears from one source: matched-filter outputs for the
/// symbols it has to estimate, and the link SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayObservation {
    pub y: Vec<f64>,
    pub gamma: f64,
}

/// Symbol-by-symbol ML detection of BPSK: the sign of the matched filter.
pub fn relay_ml_detect(obs: &RelayObservation) -> Vec<Bit> {
    obs.y.iter().map(|&y| Bit::from(y < 0.0)).collect()
}

/// C-MRC weight `min(gamma_SR, gamma_RD) / gamma_RD`; 0 when the
/// relay-destination link is dead.
pub fn cmrc_lambda(gamma_sr: f64, gamma_rd: f64) -> f64 {
    if gamma_rd <= 0.0 {
        0.0
    } else {
        gamma_sr.min(gamma_rd) / gamma_rd
    }
}

/// One relayed copy of part of a codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayedBranch {
    /// Codeword positions carried by this branch, in transmission order.
    pub theta: Vec<usize>,
    /// Matched-filter outputs at the destination, one per entry of `theta`.
    pub y: Vec<f64>,
    pub gamma_rd: f64,
    pub gamma_sr: f64,
}

/// Everything the destination knows about one source codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerInput {
    pub y_sd: Vec<f64>,
    pub gamma_sd: f64,
    pub relayed: Vec<RelayedBranch>,
}

/// Per-symbol LLRs after C-MRC: the direct LLR plus, on relayed positions,
/// `lambda` times the relayed LLR.
pub fn cmrc_combine(input: &CombinerInput) -> Result<Vec<f64>> {
    let n = input.y_sd.len();
    let mut llr: Vec<f64> = input.y_sd.iter().map(|&y| channel_llr(y, input.gamma_sd)).collect();
    for branch in &input.relayed {
        if branch.y.len() != branch.theta.len() {
            return Err(Error::LengthMismatch {
                expected: branch.theta.len(),
                actual: branch.y.len(),
            });
        }
        if let Some(&k) = branch.theta.iter().find(|&&k| k >= n) {
            return invalid(format!("relayed index {k} is outside the codeword of length {n}"));
        }
        let lambda = cmrc_lambda(branch.gamma_sr, branch.gamma_rd);
        if lambda == 0.0 {
            continue;
        }
        for (&k, &y) in branch.theta.iter().zip(&branch.y) {
            llr[k] += lambda * channel_llr(y, branch.gamma_rd);
        }
    }
    Ok(llr)
}

/// Element-wise XOR of two estimated codewords.
pub fn xor_encode(a: &[Bit], b: &[Bit]) -> Result<Vec<Bit>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

/// How the destination weights the network-coded stream before joint
/// decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NcScaling {
    /// Scale by `min(gamma_S1R, gamma_S2R, gamma_RD) / gamma_RD`.
    #[default]
    Scaled,
    /// Plain demodulation LLRs.
    Unscaled,
}

/// Weight applied to the network-coded stream.
pub fn ncc_lambda(gamma_rd: f64, gamma_s1r: f64, gamma_s2r: f64, scaling: NcScaling) -> f64 {
    if gamma_rd <= 0.0 {
        return 0.0;
    }
    match scaling {
        NcScaling::Scaled => gamma_s1r.min(gamma_s2r).min(gamma_rd) / gamma_rd,
        NcScaling::Unscaled => 1.0,
    }
}

/// LLRs of the network-coded stream as heard from the relay.
pub fn ncc_relay_llr(
    y_rd: &[f64],
    gamma_rd: f64,
    gamma_s1r: f64,
    gamma_s2r: f64,
    scaling: NcScaling,
) -> Vec<f64> {
    let lambda = ncc_lambda(gamma_rd, gamma_s1r, gamma_s2r, scaling);
    y_rd.iter().map(|&y| lambda * channel_llr(y, gamma_rd)).collect()
}
