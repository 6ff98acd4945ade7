//! Counter-based random streams.
//!
//! Every trial of every campaign cell owns a ChaCha key derived from
//! `(master seed, cell id, trial index)`. Within a trial, each random purpose
//! (data, fading, index sets, noise of one transmission) reads its own ChaCha
//! stream, so a trial can be replayed in isolation and two schemes that share
//! a purpose see the same randomness.

use crate::channel::Link;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// What a random stream is used for inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Message bits of a source.
    Data(usize),
    /// Fading coefficients of every link.
    Fading,
    /// Relayed index sets; 0 and 1 are per source, 2 is the network-coded stream.
    IndexSet(usize),
    /// Noise of one transmission over `link`; `tag` distinguishes what is sent
    /// (source index, or 2 for a network-coded stream).
    Noise { link: Link, tag: u8 },
}

impl Purpose {
    fn stream_id(self) -> u64 {
        match self {
            Purpose::Data(i) => 1 << 56 | i as u64,
            Purpose::Fading => 2 << 56,
            Purpose::IndexSet(i) => 3 << 56 | i as u64,
            Purpose::Noise { link, tag } => 4 << 56 | (tag as u64) << 48 | link.code(),
        }
    }
}

/// Stable 64-bit id for a cell label.
pub fn cell_id(label: &str) -> u64 {
    let digest = Sha256::digest(label.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// The random streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    key: [u8; 32],
}

impl TrialStreams {
    pub fn new(master_seed: u64, cell: u64, trial: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&cell.to_le_bytes());
        key[16..24].copy_from_slice(&trial.to_le_bytes());
        key[24..].copy_from_slice(b"coopsim\0");
        Self { key }
    }

    pub fn stream(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(purpose.stream_id());
        rng
    }
}
