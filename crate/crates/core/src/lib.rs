//! Link-level simulation and closed-form analysis of channel-coded cooperative
//! networks with two sources, several demodulate-and-forward relays and one
//! destination.
//!
//! Two cooperation protocols are modelled:
//!
//! * **PARC** (partial relaying): each source gets its own max-min selected
//!   relay, which forwards half of the hard-detected codeword at random
//!   positions. The destination combines with C-MRC and runs BCJR.
//! * **NCC** (network-coded cooperation): one relay forwards the XOR of both
//!   estimated codewords and the destination decodes the compound code
//!   `[[g, 0, g], [0, g, g]]` jointly.
//!
//! Two all-relays-active reference schemes (fractional repetition with and
//! without network coding) complete the set. Alongside the Monte Carlo engine
//! the [`analysis`] module evaluates union bounds on the BER built from the
//! distance spectra in [`code`], and checks them against an adaptive
//! quadrature of the MGF integral.
//!
//! LLR convention throughout: positive means bit 0 is more likely. BPSK maps
//! 0 to +1 and 1 to -1.

pub mod analysis;
pub mod channel;
pub mod code;
pub mod detect;
mod dd;
mod error;
pub mod relay;
pub mod rng;
pub mod schemes;
pub mod sim;

pub use error::{Error, Result};

/// A hard bit, stored as 0 or 1.
pub type Bit = u8;
