//! Feed-forward convolutional codes of rate 1/n: encoding, trellis,
//! BCJR decoding, distance spectra, and the compound code used by NCC.
//!
//! Generators are given in octal with the most significant bit tapping the
//! current input, so `[5, 7, 5]` is `101, 111, 101` with memory 2.

mod bcjr;
mod kernel;
mod compound;
mod spectrum;

pub use bcjr::{bcjr_decode, bcjr_decode_with, DecodeOutput, DecodingAlgo};
pub use compound::{
    build_compound_code, compute_compound_spectrum, joint_decode_ncc, joint_decode_ncc_with,
    CompoundEntry, CompoundSpectrum, CompoundTrellis, JointDecodeOutput,
};
pub use spectrum::{
    block_spectrum, brute_force_block_spectrum, compute_distance_spectrum, BlockSpectrum,
    DistanceSpectrum,
};

use crate::error::{Error, Result};
use crate::Bit;
use std::fmt;
use std::str::FromStr;

/// Largest supported memory. The compound trellis squares the state count,
/// so anything beyond this is impractical anyway.
pub const MAX_MEMORY: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// `memory` zero bits are appended so the encoder ends in state 0.
    #[default]
    ZeroTail,
    /// The encoder starts in the state given by the last `memory` input bits.
    TailBiting,
}

/// A rate-1/n feed-forward convolutional code.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    generators: Vec<u32>,
    constraint_length: usize,
    termination: Termination,
    trellis: Trellis,
}

impl CodeSpec {
    /// Builds a zero-tail code from generator polynomials (already decoded
    /// from octal).
    pub fn new(generators: &[u32]) -> Result<Self> {
        Self::with_termination(generators, Termination::ZeroTail)
    }

    pub fn with_termination(generators: &[u32], termination: Termination) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidCode("no generators".into()));
        }
        if generators.len() > 16 {
            return Err(Error::InvalidCode("at most 16 generators supported".into()));
        }
        if let Some(g) = generators.iter().find(|&&g| g == 0) {
            return Err(Error::InvalidCode(format!("generator {g:o} is zero")));
        }
        let constraint_length = generators
            .iter()
            .map(|g| 32 - g.leading_zeros() as usize)
            .max()
            .unwrap_or(1);
        if constraint_length < 2 {
            return Err(Error::InvalidCode("code has no memory".into()));
        }
        if constraint_length - 1 > MAX_MEMORY {
            return Err(Error::InvalidCode(format!(
                "constraint length {constraint_length} exceeds {}",
                MAX_MEMORY + 1
            )));
        }
        let trellis = Trellis::build(generators, constraint_length - 1);
        Ok(Self {
            generators: generators.to_vec(),
            constraint_length,
            termination,
            trellis,
        })
    }

    /// Parses generators written in octal, separated by commas or
    /// whitespace, optionally wrapped in brackets: `"133,165,171"`.
    pub fn from_octal(text: &str) -> Result<Self> {
        let trimmed = text.trim().trim_start_matches('[').trim_end_matches(']');
        let mut gens = Vec::new();
        for tok in trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let g = u32::from_str_radix(tok, 8)
                .map_err(|_| Error::InvalidCode(format!("'{tok}' is not an octal number")))?;
            gens.push(g);
        }
        Self::new(&gens)
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn constraint_length(&self) -> usize {
        self.constraint_length
    }

    /// Encoder memory, `constraint_length - 1`.
    pub fn memory(&self) -> usize {
        self.constraint_length - 1
    }

    /// Number of coded bits per information bit (the code has rate 1/n).
    pub fn n_outputs(&self) -> usize {
        self.generators.len()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Octal label such as `133,165,171`; used as the code id in CSV output.
    pub fn label(&self) -> String {
        self.generators
            .iter()
            .map(|g| format!("{g:o}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Number of trellis sections for `k` information bits.
    pub fn sections(&self, k: usize) -> usize {
        match self.termination {
            Termination::ZeroTail => k + self.memory(),
            Termination::TailBiting => k,
        }
    }

    /// Codeword length N for `k` information bits.
    pub fn codeword_len(&self, k: usize) -> usize {
        self.sections(k) * self.n_outputs()
    }

    /// Inverse of [`codeword_len`](Self::codeword_len).
    pub fn info_len(&self, n: usize) -> Result<usize> {
        let per = self.n_outputs();
        let extra = match self.termination {
            Termination::ZeroTail => self.memory(),
            Termination::TailBiting => 0,
        };
        if !n.is_multiple_of(per) || n / per <= extra {
            return Err(Error::InvalidArgument(format!(
                "{n} is not a valid codeword length for code {}",
                self.label()
            )));
        }
        Ok(n / per - extra)
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_octal(s)
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label().replace(',', " "))
    }
}

/// State-transition structure of a rate-1/n code.
///
/// The state holds the previous `memory` inputs with the most recent one in
/// the highest bit. Input `b` from state `s` goes to
/// `(b << (memory - 1)) | (s >> 1)`. Output labels pack the bit of generator
/// `i` into bit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trellis {
    memory: usize,
    n_outputs: usize,
    next: Vec<[u32; 2]>,
    label: Vec<[u32; 2]>,
    prev: Vec<[(u32, u8); 2]>,
}

impl Trellis {
    fn build(generators: &[u32], memory: usize) -> Self {
        let n_states = 1usize << memory;
        let mut next = vec![[0u32; 2]; n_states];
        let mut label = vec![[0u32; 2]; n_states];
        let mut prev = vec![Vec::with_capacity(2); n_states];
        for s in 0..n_states {
            for b in 0..2u32 {
                let reg = (b << memory) | s as u32;
                let out = generators
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, &g)| acc | (((reg & g).count_ones() & 1) << i));
                let ns = reg >> 1;
                next[s][b as usize] = ns;
                label[s][b as usize] = out;
                prev[ns as usize].push((s as u32, b as u8));
            }
        }
        let prev = prev
            .into_iter()
            .map(|p| [p[0], p[1]])
            .collect::<Vec<_>>();
        Self {
            memory,
            n_outputs: generators.len(),
            next,
            label,
            prev,
        }
    }

    pub fn n_states(&self) -> usize {
        self.next.len()
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    #[inline]
    pub fn next_state(&self, state: usize, input: Bit) -> usize {
        self.next[state][input as usize] as usize
    }

    /// Output bits of the branch, generator `i` in bit `i`.
    #[inline]
    pub fn output(&self, state: usize, input: Bit) -> u32 {
        self.label[state][input as usize]
    }

    /// The two (previous state, input) pairs entering `state`.
    #[inline]
    pub fn predecessors(&self, state: usize) -> [(u32, u8); 2] {
        self.prev[state]
    }

    /// Hamming weight of a branch label.
    #[inline]
    pub fn output_weight(&self, state: usize, input: Bit) -> u32 {
        self.output(state, input).count_ones()
    }
}

/// Encodes `data` with `code`. Outputs of the n generators are interleaved
/// per trellis section, generator 0 first.
pub fn encode(data: &[Bit], code: &CodeSpec) -> Vec<Bit> {
    let t = code.trellis();
    let n = code.n_outputs();
    let m = code.memory();
    let mut state = match code.termination() {
        Termination::ZeroTail => 0usize,
        Termination::TailBiting => {
            // The state after the last `m` inputs, with the newest in the top bit.
            let k = data.len();
            (0..m.min(k)).fold(0usize, |s, i| {
                let b = data[k - m.min(k) + i] & 1;
                ((b as usize) << (m - 1)) | (s >> 1)
            })
        }
    };
    let mut out = Vec::with_capacity(code.codeword_len(data.len()));
    let tail = match code.termination() {
        Termination::ZeroTail => m,
        Termination::TailBiting => 0,
    };
    for &b in data.iter().chain(std::iter::repeat_n(&0, tail)) {
        let b = b & 1;
        let label = t.output(state, b);
        out.extend((0..n).map(|i| ((label >> i) & 1) as Bit));
        state = t.next_state(state, b);
    }
    out
}

/// BPSK mapping 0 -> +1, 1 -> -1.
pub fn bpsk(bits: &[Bit]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight(bits: &[Bit]) -> usize {
        bits.iter().filter(|&&b| b == 1).count()
    }

    fn impulse(k: usize) -> Vec<Bit> {
        let mut u = vec![0; k];
        u[0] = 1;
        u
    }

    #[test]
    fn parses_octal_lists() {
        let c = CodeSpec::from_octal("133,165,171").unwrap();
        assert_eq!(c.generators(), &[0o133, 0o165, 0o171]);
        assert_eq!(c.constraint_length(), 7);
        assert_eq!(c.trellis().n_states(), 64);
        let c: CodeSpec = "[25 33 37]".parse().unwrap();
        assert_eq!(c.memory(), 4);
        assert_eq!(c.label(), "25,33,37");
        assert!(CodeSpec::from_octal("19,7").is_err());
        assert!(CodeSpec::from_octal("").is_err());
        assert!(CodeSpec::from_octal("1,1").is_err());
    }

    #[test]
    fn every_state_has_two_in_two_out() {
        let c = CodeSpec::from_octal("25,33,37").unwrap();
        let t = c.trellis();
        let mut indeg = vec![0; t.n_states()];
        for s in 0..t.n_states() {
            for b in 0..2 {
                indeg[t.next_state(s, b)] += 1;
            }
            for (p, b) in t.predecessors(s) {
                assert_eq!(t.next_state(p as usize, b), s);
            }
        }
        assert!(indeg.iter().all(|&d| d == 2));
    }

    #[test]
    fn zero_input_gives_zero_codeword() {
        let c = CodeSpec::from_octal("133,165,171").unwrap();
        let cw = encode(&vec![0; 1024], &c);
        assert_eq!(cw.len(), 3 * (1024 + 6));
        assert_eq!(weight(&cw), 0);
    }

    #[test]
    fn impulse_weights_equal_generator_weights() {
        let c = CodeSpec::from_octal("5,7,5").unwrap();
        assert_eq!(weight(&encode(&impulse(20), &c)), 7);
        let c = CodeSpec::from_octal("25,33,37").unwrap();
        assert_eq!(weight(&encode(&impulse(20), &c)), 12);
    }

    #[test]
    fn impulse_response_is_the_generator_taps() {
        // [5 7]: impulse gives 11 01 11 read generator-interleaved.
        let c = CodeSpec::from_octal("5,7").unwrap();
        let cw = encode(&[1, 0, 0], &c);
        assert_eq!(cw, vec![1, 1, 0, 1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn tail_biting_starts_and_ends_in_the_same_state() {
        let c = CodeSpec::with_termination(&[0o5, 0o7], Termination::TailBiting).unwrap();
        let u = vec![1, 0, 1, 1, 0, 0, 1];
        let cw = encode(&u, &c);
        assert_eq!(cw.len(), 14);
        // Rotating the input rotates the tail-biting codeword.
        let mut r = u.clone();
        r.rotate_left(1);
        let mut cr = cw.clone();
        cr.rotate_left(2);
        assert_eq!(encode(&r, &c), cr);
    }
}
