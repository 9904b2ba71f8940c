//! Seedable randomness. Every artifact is a pure function of the seed bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type SeededRng = ChaCha20Rng;

pub fn rng_from_seed(seed: &[u8]) -> SeededRng {
    let digest: [u8; 32] = Sha256::new().chain_update(b"RCCPABE-rng").chain_update(seed).finalize().into();
    SeededRng::from_seed(digest)
}

/// Independent child stream identified by `label`.
pub fn child_rng(seed: &[u8], label: &str) -> SeededRng {
    let mut material = Vec::with_capacity(seed.len() + label.len() + 1);
    material.extend_from_slice(seed);
    material.push(0);
    material.extend_from_slice(label.as_bytes());
    rng_from_seed(&material)
}
