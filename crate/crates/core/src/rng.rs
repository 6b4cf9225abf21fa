//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! `(master seed, domain, index)`. The master seed and domain tag fill the
//! 256-bit key, the index selects one of the 2^64 ChaCha streams. Streams with
//! different keys or indices are independent, so work items can be evaluated
//! in any order (or in parallel) without changing the numbers they see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct domains never share a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Disorder = 0x6469_736f_7264_6572,
    TimeJitter = 0x6a69_7474_6572_0001,
    RandomState = 0x7270_7365_0000_0001,
    MonteCarlo = 0x7270_7365_6d63_0002,
}

/// Returns the stream for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
