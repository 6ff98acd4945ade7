use super::kernel::{
    backward_row, forward_row, joint_metric, normalize, to_natural, to_split, Exact, Linear, MaxLog,
    MaxStar,
};
use super::{CodeSpec, Termination, Trellis};
use crate::error::{Error, Result};
use crate::Bit;
use serde::{Deserialize, Serialize};

/// How the log-domain recursions combine competing path metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodingAlgo {
    /// Exact Jacobian logarithm, `max(a, b) + ln(1 + exp(-|a - b|))`.
    #[default]
    LogMap,
    /// Plain `max`; the correction term is dropped.
    MaxLogMap,
    /// Piecewise-linear approximation of the correction term.
    LinearLogMap,
}

/// Decisions and a-posteriori LLRs for the information bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub bits: Vec<Bit>,
    pub llrs: Vec<f64>,
}

/// Log-MAP BCJR decoding of `channel_llrs` (length N, positive = bit 0).
pub fn bcjr_decode(channel_llrs: &[f64], code: &CodeSpec) -> Result<DecodeOutput> {
    bcjr_decode_with(channel_llrs, code, DecodingAlgo::LogMap)
}

pub fn bcjr_decode_with(
    channel_llrs: &[f64],
    code: &CodeSpec,
    algo: DecodingAlgo,
) -> Result<DecodeOutput> {
    let k = code
        .info_len(channel_llrs.len())
        .map_err(|_| length_error(code, channel_llrs.len()))?;
    if let Some(i) = channel_llrs.iter().position(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument(format!("LLR {i} is not finite")));
    }
    Ok(match algo {
        DecodingAlgo::LogMap => run::<Exact>(channel_llrs, code, k),
        DecodingAlgo::MaxLogMap => run::<MaxLog>(channel_llrs, code, k),
        DecodingAlgo::LinearLogMap => run::<Linear>(channel_llrs, code, k),
    })
}

/// Reports the nearest valid codeword length.
pub(crate) fn length_error(code: &CodeSpec, actual: usize) -> Error {
    let sections = (actual / code.n_outputs()).max(code.sections(1));
    Error::LengthMismatch {
        expected: sections * code.n_outputs(),
        actual,
    }
}

/// Metric of every possible branch label for one section: bit `i` of the
/// label contributes `+L_i/2` when 0 and `-L_i/2` when 1.
pub(crate) fn label_metrics(llrs: &[f64], table: &mut [f64]) {
    let n = llrs.len();
    for (label, slot) in table.iter_mut().enumerate().take(1 << n) {
        *slot = llrs
            .iter()
            .enumerate()
            .map(|(i, &l)| if (label >> i) & 1 == 0 { 0.5 * l } else { -0.5 * l })
            .sum();
    }
}

/// Branch metrics per section: `[g0, g1]`, each over the states in split
/// order.
fn state_metrics(t: &Trellis, llrs: &[f64], sections: usize) -> Vec<f64> {
    let n = t.n_outputs();
    let s = t.n_states();
    let mut table = vec![0.0; 1 << n];
    let mut natural = vec![0.0; s];
    let mut out = vec![0.0; sections * 2 * s];
    for sec in 0..sections {
        label_metrics(&llrs[sec * n..(sec + 1) * n], &mut table);
        let row = &mut out[sec * 2 * s..(sec + 1) * 2 * s];
        for (b, half) in row.chunks_exact_mut(s).enumerate() {
            for (st, v) in natural.iter_mut().enumerate() {
                *v = table[t.output(st, b as Bit) as usize];
            }
            to_split(&natural, half);
        }
    }
    out
}

fn forward<M: MaxStar>(s: usize, metrics: &[f64], sections: usize, alpha: &mut [f64]) {
    let mut row = vec![0.0; s];
    for sec in 0..sections {
        let (g0, g1) = metrics[sec * 2 * s..(sec + 1) * 2 * s].split_at(s);
        let (cur, nxt) = alpha[sec * s..(sec + 2) * s].split_at_mut(s);
        to_split(cur, &mut row);
        forward_row::<M>(&row, g0, g1, nxt);
        normalize(nxt);
    }
}

fn backward<M: MaxStar>(s: usize, metrics: &[f64], sections: usize, beta: &mut [f64]) {
    let mut row = vec![0.0; s];
    for sec in (0..sections).rev() {
        let (g0, g1) = metrics[sec * 2 * s..(sec + 1) * 2 * s].split_at(s);
        let (cur, nxt) = beta[sec * s..(sec + 2) * s].split_at_mut(s);
        backward_row::<M>(nxt, g0, g1, &mut row);
        normalize(&mut row);
        to_natural(&row, cur);
    }
}

fn run<M: MaxStar>(llrs: &[f64], code: &CodeSpec, k: usize) -> DecodeOutput {
    let t = code.trellis();
    let s = t.n_states();
    let sections = code.sections(k);
    let metrics = state_metrics(t, llrs, sections);

    let mut alpha = vec![f64::NEG_INFINITY; (sections + 1) * s];
    let mut beta = vec![f64::NEG_INFINITY; (sections + 1) * s];
    match code.termination() {
        Termination::ZeroTail => {
            alpha[0] = 0.0;
            beta[sections * s] = 0.0;
            forward::<M>(s, &metrics, sections, &mut alpha);
            backward::<M>(s, &metrics, sections, &mut beta);
        }
        Termination::TailBiting => {
            // One wrap-around pass to estimate the unknown circular state.
            alpha[..s].fill(0.0);
            forward::<M>(s, &metrics, sections, &mut alpha);
            let wrapped = alpha[sections * s..].to_vec();
            alpha[..s].copy_from_slice(&wrapped);
            forward::<M>(s, &metrics, sections, &mut alpha);

            beta[sections * s..].fill(0.0);
            backward::<M>(s, &metrics, sections, &mut beta);
            let wrapped = beta[..s].to_vec();
            beta[sections * s..].copy_from_slice(&wrapped);
            backward::<M>(s, &metrics, sections, &mut beta);
        }
    }

    // The input bit of a branch is the top bit of the state it enters.
    let h = s / 2;
    let out_llrs: Vec<f64> = (1..=k)
        .map(|sec| {
            let a = &alpha[sec * s..(sec + 1) * s];
            let b = &beta[sec * s..(sec + 1) * s];
            joint_metric::<M>(&a[..h], &b[..h]) - joint_metric::<M>(&a[h..], &b[h..])
        })
        .collect();
    let bits = out_llrs.iter().map(|&l| Bit::from(l < 0.0)).collect();
    DecodeOutput {
        bits,
        llrs: out_llrs,
    }
}
