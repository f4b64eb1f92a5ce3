//! Per-stage seed derivation.
//!
//! A single run seed drives every stochastic stage. Each stage gets its own
//! stream: the first eight bytes (little-endian) of
//! `SHA-256(stage_name || 0x00 || seed.to_le_bytes())`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn stage_seed(stage: &str, seed: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(stage.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest is 32 bytes"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stage_rng(stage: &str, seed: u64) -> ChaCha8Rng {
    rng(stage_seed(stage, seed))
}

/// Hex SHA-256 of arbitrary bytes; used for dataset and artifact digests.
pub fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
