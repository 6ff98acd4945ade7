//! Block Rayleigh fading, AWGN and per-link SNR bookkeeping.
//!
//! Noise is the real part of unit-power complex noise, so it has variance
//! 1/2. With `y = sqrt(gamma) x + n` the BPSK error probability is
//! `Q(sqrt(2 gamma))` and the exact LLR is `4 sqrt(gamma) y`.

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::io::Write;

/// A terminal of the network. Sources are 0 and 1; relays are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Source(usize),
    Relay(usize),
    Destination,
}

impl Node {
    fn code(self) -> u64 {
        match self {
            Node::Source(i) => i as u64,
            Node::Relay(j) => 0x1000 + j as u64,
            Node::Destination => 0xffff,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source(i) => write!(f, "S{}", i + 1),
            Node::Relay(j) => write!(f, "R{}", j + 1),
            Node::Destination => write!(f, "D"),
        }
    }
}

/// A directed link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub from: Node,
    pub to: Node,
}

impl Link {
    pub fn new(from: Node, to: Node) -> Self {
        Self { from, to }
    }

    pub fn sd(source: usize) -> Self {
        Self::new(Node::Source(source), Node::Destination)
    }

    pub fn sr(source: usize, relay: usize) -> Self {
        Self::new(Node::Source(source), Node::Relay(relay))
    }

    pub fn rd(relay: usize) -> Self {
        Self::new(Node::Relay(relay), Node::Destination)
    }

    pub(crate) fn code(self) -> u64 {
        self.from.code() << 16 | self.to.code()
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

/// Average SNR of every link (linear scale).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    sd: [f64; 2],
    /// Indexed by relay, then source.
    sr: Vec<[f64; 2]>,
    rd: Vec<f64>,
}

/// Maximum number of relays; subset enumeration in the analysis is 2^N_r.
pub const MAX_RELAYS: usize = 16;

/// Converts dB to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts linear to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Link budget from geometry: sources and destination at unit distance, relays
/// on the line between them at `relay_position`, pathloss
/// `distance^-pathloss_exponent` relative to the source-destination link.
pub fn build_link_budget(
    snr_sd_db: f64,
    n_relays: usize,
    pathloss_exponent: f64,
    relay_position: f64,
) -> Result<LinkBudget> {
    if !snr_sd_db.is_finite() {
        return invalid(format!("source-destination SNR {snr_sd_db} dB is not a positive finite SNR"));
    }
    if !(relay_position > 0.0 && relay_position < 1.0) {
        return invalid(format!("relay position {relay_position} must lie in (0, 1)"));
    }
    if !(pathloss_exponent >= 0.0 && pathloss_exponent.is_finite()) {
        return invalid(format!("pathloss exponent {pathloss_exponent} must be non-negative"));
    }
    let sd = db_to_linear(snr_sd_db);
    let sr = sd * relay_position.powf(-pathloss_exponent);
    let rd = sd * (1.0 - relay_position).powf(-pathloss_exponent);
    LinkBudget::from_parts([sd, sd], vec![[sr, sr]; n_relays], vec![rd; n_relays])
}

impl LinkBudget {
    /// Budget from explicit average SNRs. Zero entries are allowed and model a
    /// muted link.
    pub fn from_parts(sd: [f64; 2], sr: Vec<[f64; 2]>, rd: Vec<f64>) -> Result<Self> {
        if sr.len() != rd.len() {
            return Err(Error::LengthMismatch {
                expected: sr.len(),
                actual: rd.len(),
            });
        }
        if sr.is_empty() || sr.len() > MAX_RELAYS {
            return invalid(format!(
                "number of relays must be in 1..={MAX_RELAYS}, got {}",
                sr.len()
            ));
        }
        let all = sd.iter().chain(sr.iter().flatten()).chain(&rd);
        if let Some(x) = all.into_iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return invalid(format!("average SNR {x} must be finite and non-negative"));
        }
        Ok(Self { sd, sr, rd })
    }

    /// Copy with every relay-destination link muted.
    pub fn with_relay_links_muted(&self) -> Self {
        Self {
            rd: vec![0.0; self.rd.len()],
            ..self.clone()
        }
    }

    pub fn n_relays(&self) -> usize {
        self.rd.len()
    }

    pub fn sd(&self, source: usize) -> f64 {
        self.sd[source]
    }

    pub fn sr(&self, source: usize, relay: usize) -> f64 {
        self.sr[relay][source]
    }

    pub fn rd(&self, relay: usize) -> f64 {
        self.rd[relay]
    }

    /// All links in a fixed order: S1-D, S2-D, then per relay S1-R, S2-R, R-D.
    pub fn links(&self) -> Vec<Link> {
        let mut out = vec![Link::sd(0), Link::sd(1)];
        for j in 0..self.n_relays() {
            out.extend([Link::sr(0, j), Link::sr(1, j), Link::rd(j)]);
        }
        out
    }

    pub fn gamma_bar(&self, link: Link) -> Option<f64> {
        match (link.from, link.to) {
            (Node::Source(i), Node::Destination) if i < 2 => Some(self.sd[i]),
            (Node::Source(i), Node::Relay(j)) if i < 2 => self.sr.get(j).map(|p| p[i]),
            (Node::Relay(j), Node::Destination) => self.rd.get(j).copied(),
            _ => None,
        }
    }

    /// Writes `link,gamma_bar_db` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        wr.write_record(["link", "gamma_bar_db"]).map_err(io)?;
        for link in self.links() {
            let g = self.gamma_bar(link).expect("listed link");
            wr.write_record([link.to_string(), format!("{:.4}", linear_to_db(g))])
                .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Fading of every link for one cooperation period.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    links: Vec<Link>,
    h: Vec<Complex64>,
    gamma: Vec<f64>,
    n_relays: usize,
}

impl ChannelRealization {
    /// Builds a realization from explicit instantaneous SNRs (`h` is taken
    /// real and positive). Mostly useful for tests and crafted scenarios.
    pub fn from_gammas(sd: [f64; 2], sr: &[[f64; 2]], rd: &[f64]) -> Result<Self> {
        let budget = LinkBudget::from_parts(sd, sr.to_vec(), rd.to_vec())?;
        let links = budget.links();
        let gamma: Vec<f64> = links.iter().map(|&l| budget.gamma_bar(l).unwrap()).collect();
        Ok(Self {
            h: gamma.iter().map(|_| Complex64::new(1.0, 0.0)).collect(),
            gamma,
            links,
            n_relays: rd.len(),
        })
    }

    pub fn n_relays(&self) -> usize {
        self.n_relays
    }

    fn index(&self, link: Link) -> usize {
        match (link.from, link.to) {
            (Node::Source(i), Node::Destination) => i,
            (Node::Source(i), Node::Relay(j)) => 2 + 3 * j + i,
            (Node::Relay(j), Node::Destination) => 2 + 3 * j + 2,
            _ => panic!("link {link} does not exist"),
        }
    }

    pub fn h(&self, link: Link) -> Complex64 {
        self.h[self.index(link)]
    }

    pub fn gamma(&self, link: Link) -> f64 {
        self.gamma[self.index(link)]
    }

    pub fn sd(&self, source: usize) -> f64 {
        self.gamma[source]
    }

    pub fn sr(&self, source: usize, relay: usize) -> f64 {
        self.gamma[2 + 3 * relay + source]
    }

    pub fn rd(&self, relay: usize) -> f64 {
        self.gamma[2 + 3 * relay + 2]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }
}

/// Draws one circularly-symmetric complex Gaussian with unit variance.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws independent fading for every link of `budget`, in the order of
/// [`LinkBudget::links`].
pub fn draw_realization<R: Rng + ?Sized>(budget: &LinkBudget, rng: &mut R) -> ChannelRealization {
    let links = budget.links();
    let h: Vec<Complex64> = links.iter().map(|_| draw_fading(rng)).collect();
    let gamma = links
        .iter()
        .zip(&h)
        .map(|(&l, h)| budget.gamma_bar(l).unwrap() * h.norm_sqr())
        .collect();
    ChannelRealization {
        links,
        h,
        gamma,
        n_relays: budget.n_relays(),
    }
}

/// Received statistics of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<f64>,
    pub llr: Vec<f64>,
    pub gamma: f64,
}

/// `n` real noise samples of variance 1/2.
pub fn awgn<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| s * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Channel LLR of one matched-filter output.
#[inline]
pub fn channel_llr(y: f64, gamma: f64) -> f64 {
    4.0 * gamma.sqrt() * y
}

/// Sends `symbols` over a link with instantaneous SNR `gamma`.
pub fn transmit<R: Rng + ?Sized>(symbols: &[f64], gamma: f64, rng: &mut R) -> Result<Observation> {
    let noise = awgn(symbols.len(), rng);
    observe(symbols, gamma, &noise)
}

/// Like [`transmit`] with explicit noise samples, one per symbol.
pub fn observe(symbols: &[f64], gamma: f64, noise: &[f64]) -> Result<Observation> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return invalid(format!("instantaneous SNR {gamma} must be finite and >= 0"));
    }
    if noise.len() != symbols.len() {
        return Err(Error::LengthMismatch {
            expected: symbols.len(),
            actual: noise.len(),
        });
    }
    let a = gamma.sqrt();
    let y: Vec<f64> = symbols.iter().zip(noise).map(|(x, n)| a * x + n).collect();
    let llr = y.iter().map(|&v| channel_llr(v, gamma)).collect();
    Ok(Observation { y, llr, gamma })
}
