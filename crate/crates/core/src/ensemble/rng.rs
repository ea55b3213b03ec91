//! Counter-based random streams: every draw is keyed by
//! `(seed, role, a, b)`, so any codebook entry, assignment or Monte Carlo
//! chunk can be regenerated independently of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const CODEBOOK: u64 = 1;
pub(crate) const ASSIGN: u64 = 2;
pub(crate) const FALLBACK: u64 = 3;
pub(crate) const MONTE_CARLO: u64 = 4;
pub(crate) const PROBE: u64 = 5;

/// Role word combining a stream kind, blocklength and encoder family.
pub(crate) fn role(kind: u64, n: usize, family: u64) -> u64 {
    kind | (n as u64) << 16 | family << 32
}

pub(crate) fn stream(seed: u64, role: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_mut(8).zip([seed, role, a, b]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
