//! One cooperation period of each transmission scheme.
//!
//! Every scheme draws its randomness from [`TrialStreams`] by purpose, and
//! every transmission uses a full codeword-length noise vector indexed by
//! codeword position. Schemes that coincide in a degenerate configuration
//! (REF1 with one relay and PARC, REF2 with one relay and NCC, PARC with
//! muted relays and the direct link) therefore produce identical errors on
//! the same trial, not just identical statistics.

use crate::channel::{draw_fading, draw_realization, awgn, ChannelRealization, Link, LinkBudget};
use crate::code::{
    bcjr_decode_with, bpsk, build_compound_code, encode, joint_decode_ncc_with, CodeSpec,
    DecodingAlgo,
};
use crate::detect::{
    cmrc_combine, ncc_relay_llr, relay_ml_detect, xor_encode, CombinerInput, NcScaling,
    RelayObservation, RelayedBranch,
};
use crate::error::{invalid, Result};
use crate::relay::{select_ncc, select_parc};
use crate::rng::{Purpose, TrialStreams};
use crate::Bit;
use rand::seq::index;
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Per-source max-min relay forwards half the codeword.
    Parc,
    /// Max-min relay forwards the XOR of both codewords.
    Ncc,
    /// All relays forward disjoint 1/(2 N_r) fractions of each codeword.
    Ref1,
    /// All relays forward disjoint 1/N_r fractions of the XOR codeword.
    Ref2,
    /// Coded transmission over the source-destination links only.
    Direct,
    /// Uncoded BPSK over independently faded symbols.
    Uncoded,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Parc,
        Scheme::Ncc,
        Scheme::Ref1,
        Scheme::Ref2,
        Scheme::Direct,
        Scheme::Uncoded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Parc => "parc",
            Scheme::Ncc => "ncc",
            Scheme::Ref1 => "ref1",
            Scheme::Ref2 => "ref2",
            Scheme::Direct => "direct",
            Scheme::Uncoded => "uncoded",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == lower)
            .map_or_else(
                || invalid(format!("unknown scheme {s:?} (expected one of parc, ncc, ref1, ref2, direct, uncoded)")),
                Ok,
            )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub code: CodeSpec,
    pub n_relays: usize,
    /// Information bits per source and period.
    pub k: usize,
    pub decoder: DecodingAlgo,
    pub nc_scaling: NcScaling,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, code: CodeSpec, n_relays: usize) -> Self {
        Self {
            scheme,
            code,
            n_relays,
            k: 1024,
            decoder: DecodingAlgo::default(),
            nc_scaling: NcScaling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return invalid("packet length K must be at least 1");
        }
        if self.n_relays == 0 || self.n_relays > crate::channel::MAX_RELAYS {
            return invalid(format!(
                "number of relays must be in 1..={}, got {}",
                crate::channel::MAX_RELAYS,
                self.n_relays
            ));
        }
        Ok(())
    }
}

/// Error counts of one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundResult {
    pub bit_errors: [u64; 2],
    pub frame_errors: [bool; 2],
    /// Information bits per source.
    pub bits: u64,
}

impl RoundResult {
    pub fn total_bit_errors(&self) -> u64 {
        self.bit_errors[0] + self.bit_errors[1]
    }

    pub fn total_frame_errors(&self) -> u64 {
        self.frame_errors.iter().filter(|&&e| e).count() as u64
    }

    fn count(truth: [&[Bit]; 2], decided: [&[Bit]; 2]) -> Self {
        let errors = |a: &[Bit], b: &[Bit]| a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
        let bit_errors = [errors(truth[0], decided[0]), errors(truth[1], decided[1])];
        Self {
            bit_errors,
            frame_errors: bit_errors.map(|e| e > 0),
            bits: truth[0].len() as u64,
        }
    }
}

/// Runs one period of `cfg.scheme`.
pub fn run_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    match cfg.scheme {
        Scheme::Parc => run_parc_round(cfg, budget, streams),
        Scheme::Ncc => run_ncc_round(cfg, budget, streams),
        Scheme::Ref1 => run_ref1_round(cfg, budget, streams),
        Scheme::Ref2 => run_ref2_round(cfg, budget, streams),
        Scheme::Direct => run_direct_round(cfg, budget, streams),
        Scheme::Uncoded => run_uncoded_round(cfg, budget, streams),
    }
}

struct Period<'a> {
    cfg: &'a SchemeConfig,
    streams: &'a TrialStreams,
    data: [Vec<Bit>; 2],
    x: [Vec<f64>; 2],
    real: ChannelRealization,
}

impl<'a> Period<'a> {
    fn start(cfg: &'a SchemeConfig, budget: &LinkBudget, streams: &'a TrialStreams) -> Result<Self> {
        cfg.validate()?;
        if budget.n_relays() != cfg.n_relays {
            return invalid(format!(
                "link budget has {} relays, scheme expects {}",
                budget.n_relays(),
                cfg.n_relays
            ));
        }
        let data = [0, 1].map(|i| random_bits(cfg.k, &mut streams.stream(Purpose::Data(i))));
        let x = [0, 1].map(|i| bpsk(&encode(&data[i], &cfg.code)));
        let real = draw_realization(budget, &mut streams.stream(Purpose::Fading));
        Ok(Self {
            cfg,
            streams,
            data,
            x,
            real,
        })
    }

    fn n(&self) -> usize {
        self.x[0].len()
    }

    fn noise(&self, link: Link, tag: u8) -> Vec<f64> {
        awgn(self.n(), &mut self.streams.stream(Purpose::Noise { link, tag }))
    }

    /// Matched-filter outputs of the whole codeword of `source` over `link`.
    fn hear(&self, source: usize, link: Link, gamma: f64) -> Vec<f64> {
        let a = gamma.sqrt();
        let noise = self.noise(link, source as u8);
        self.x[source].iter().zip(noise).map(|(x, n)| a * x + n).collect()
    }

    fn direct(&self, source: usize) -> (Vec<f64>, f64) {
        let g = self.real.sd(source);
        (self.hear(source, Link::sd(source), g), g)
    }

    /// Relay `relay` detects the symbols of `source` at `theta`.
    fn relay_estimate(&self, source: usize, relay: usize, theta: &[usize]) -> Vec<Bit> {
        let g = self.real.sr(source, relay);
        let y = self.hear(source, Link::sr(source, relay), g);
        relay_ml_detect(&RelayObservation {
            y: theta.iter().map(|&k| y[k]).collect(),
            gamma: g,
        })
    }

    /// Sends `bits` (the symbols for positions `theta`) from `relay` to the
    /// destination.
    fn forward(&self, relay: usize, tag: u8, theta: &[usize], bits: &[Bit]) -> Vec<f64> {
        let g = self.real.rd(relay);
        let a = g.sqrt();
        let noise = self.noise(Link::rd(relay), tag);
        theta
            .iter()
            .zip(bpsk(bits))
            .map(|(&k, x)| a * x + noise[k])
            .collect()
    }

    fn relayed_branch(&self, source: usize, relay: usize, theta: Vec<usize>) -> RelayedBranch {
        let est = self.relay_estimate(source, relay, &theta);
        let y = self.forward(relay, source as u8, &theta, &est);
        RelayedBranch {
            theta,
            y,
            gamma_rd: self.real.rd(relay),
            gamma_sr: self.real.sr(source, relay),
        }
    }

    /// Relay `relay` forwards the XOR of its estimates at `theta`; the
    /// scaled LLRs are written into `llr_nc`.
    fn network_coded(&self, relay: usize, theta: &[usize], llr_nc: &mut [f64]) -> Result<()> {
        let e1 = self.relay_estimate(0, relay, theta);
        let e2 = self.relay_estimate(1, relay, theta);
        let y = self.forward(relay, 2, theta, &xor_encode(&e1, &e2)?);
        let llr = ncc_relay_llr(
            &y,
            self.real.rd(relay),
            self.real.sr(0, relay),
            self.real.sr(1, relay),
            self.cfg.nc_scaling,
        );
        for (&k, l) in theta.iter().zip(llr) {
            llr_nc[k] = l;
        }
        Ok(())
    }

    fn partition(&self, stream: usize, parts: usize, per_part: usize) -> Vec<Vec<usize>> {
        partition(&mut self.streams.stream(Purpose::IndexSet(stream)), self.n(), parts, per_part)
    }

    fn decode_separately(&self, branches: [Vec<RelayedBranch>; 2]) -> Result<RoundResult> {
        let mut decided: [Vec<Bit>; 2] = Default::default();
        for (i, relayed) in branches.into_iter().enumerate() {
            let (y_sd, gamma_sd) = self.direct(i);
            let llr = cmrc_combine(&CombinerInput {
                y_sd,
                gamma_sd,
                relayed,
            })?;
            decided[i] = bcjr_decode_with(&llr, &self.cfg.code, self.cfg.decoder)?.bits;
        }
        Ok(RoundResult::count(
            [&self.data[0], &self.data[1]],
            [&decided[0], &decided[1]],
        ))
    }

    fn decode_jointly(&self, llr_nc: &[f64]) -> Result<RoundResult> {
        let llr = [0, 1].map(|i| {
            let (y, g) = self.direct(i);
            y.iter().map(|&v| crate::channel::channel_llr(v, g)).collect::<Vec<_>>()
        });
        let out = joint_decode_ncc_with(
            &llr[0],
            &llr[1],
            llr_nc,
            &build_compound_code(&self.cfg.code),
            self.cfg.decoder,
        )?;
        Ok(RoundResult::count(
            [&self.data[0], &self.data[1]],
            [&out.bits1, &out.bits2],
        ))
    }
}

fn random_bits<R: Rng>(k: usize, rng: &mut R) -> Vec<Bit> {
    (0..k).map(|_| rng.random_range(0..2)).collect()
}

/// `parts` disjoint random index sets of `per_part` positions each out of
/// `0..n`, each sorted. Positions left over are in no set.
pub fn partition<R: Rng>(rng: &mut R, n: usize, parts: usize, per_part: usize) -> Vec<Vec<usize>> {
    assert!(parts * per_part <= n, "{parts} x {per_part} positions exceed {n}");
    let picked = index::sample(rng, n, parts * per_part).into_vec();
    picked
        .chunks(per_part.max(1))
        .take(parts)
        .map(|c| {
            let mut v = c.to_vec();
            v.sort_unstable();
            v
        })
        .chain(std::iter::repeat_with(Vec::new))
        .take(parts)
        .collect()
}

/// PARC: each source's max-min relay forwards floor(N/2) random positions.
pub fn run_parc_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    let p = Period::start(cfg, budget, streams)?;
    let l = p.n() / 2;
    let branches = [0, 1].map(|i| {
        let sel = select_parc(&p.real, i);
        let theta = p.partition(i, 1, l).pop().unwrap_or_default();
        vec![p.relayed_branch(i, sel.relay, theta)]
    });
    p.decode_separately(branches)
}

/// NCC: the max-min relay forwards the XOR of both codewords.
pub fn run_ncc_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    let p = Period::start(cfg, budget, streams)?;
    let sel = select_ncc(&p.real);
    let theta: Vec<usize> = (0..p.n()).collect();
    let mut llr_nc = vec![0.0; p.n()];
    p.network_coded(sel.relay, &theta, &mut llr_nc)?;
    p.decode_jointly(&llr_nc)
}

/// Fractional repetition: relay j forwards its own floor(N/(2 N_r))
/// positions of each codeword.
pub fn run_ref1_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    let p = Period::start(cfg, budget, streams)?;
    let per = p.n() / (2 * cfg.n_relays);
    let branches = [0, 1].map(|i| {
        p.partition(i, cfg.n_relays, per)
            .into_iter()
            .enumerate()
            .map(|(j, theta)| p.relayed_branch(i, j, theta))
            .collect()
    });
    p.decode_separately(branches)
}

/// Network-coded fractional repetition: relay j forwards its own
/// floor(N/N_r) positions of the XOR codeword.
pub fn run_ref2_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    let p = Period::start(cfg, budget, streams)?;
    let per = p.n() / cfg.n_relays;
    let mut llr_nc = vec![0.0; p.n()];
    for (j, theta) in p.partition(2, cfg.n_relays, per).into_iter().enumerate() {
        p.network_coded(j, &theta, &mut llr_nc)?;
    }
    p.decode_jointly(&llr_nc)
}

/// No cooperation: each source is decoded from its direct link alone.
pub fn run_direct_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    let p = Period::start(cfg, budget, streams)?;
    p.decode_separately([Vec::new(), Vec::new()])
}

/// Uncoded BPSK; every symbol sees its own fade, so bit errors are
/// independent and the binomial confidence interval applies.
pub fn run_uncoded_round(cfg: &SchemeConfig, budget: &LinkBudget, streams: &TrialStreams) -> Result<RoundResult> {
    cfg.validate()?;
    let data = [0, 1].map(|i| random_bits(cfg.k, &mut streams.stream(Purpose::Data(i))));
    let mut fading = streams.stream(Purpose::Fading);
    let mut decided: [Vec<Bit>; 2] = Default::default();
    for i in 0..2 {
        let noise = awgn(cfg.k, &mut streams.stream(Purpose::Noise { link: Link::sd(i), tag: i as u8 }));
        decided[i] = data[i]
            .iter()
            .zip(noise)
            .map(|(&b, n)| {
                let gamma = budget.sd(i) * draw_fading(&mut fading).norm_sqr();
                let x = if b == 0 { 1.0 } else { -1.0 };
                Bit::from(gamma.sqrt() * x + n < 0.0)
            })
            .collect();
    }
    Ok(RoundResult::count([&data[0], &data[1]], [&decided[0], &decided[1]]))
}
