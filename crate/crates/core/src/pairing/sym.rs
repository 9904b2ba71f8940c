//! Authenticated symmetric layer (ChaCha20-Poly1305, random 96-bit nonce prefix).

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::RngCore;

use super::PairingError;

pub const SYM_KEY_BYTES: usize = 32;
const NONCE_BYTES: usize = 12;

/// Element of the key space `K`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymKey(pub [u8; SYM_KEY_BYTES]);

impl std::fmt::Debug for SymKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SymKey(..)")
    }
}

impl SymKey {
    pub fn random<R: RngCore>(rng: &mut R) -> SymKey {
        let mut k = [0u8; SYM_KEY_BYTES];
        rng.fill_bytes(&mut k);
        SymKey(k)
    }
}

/// Returns `nonce || ciphertext || tag`.
pub fn sym_encrypt<R: RngCore>(key: &SymKey, msg: &[u8], rng: &mut R) -> Vec<u8> {
    let cipher = ChaCha20Poly1305::new(Key::from_slice(&key.0));
    let mut nonce = [0u8; NONCE_BYTES];
    rng.fill_bytes(&mut nonce);
    let body = cipher
        .encrypt(Nonce::from_slice(&nonce), msg)
        .expect("chacha20poly1305 encryption is infallible for in-memory buffers");
    let mut out = Vec::with_capacity(NONCE_BYTES + body.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&body);
    out
}

pub fn sym_decrypt(key: &SymKey, ct: &[u8]) -> Result<Vec<u8>, PairingError> {
    if ct.len() < NONCE_BYTES {
        return Err(PairingError::Integrity);
    }
    let cipher = ChaCha20Poly1305::new(Key::from_slice(&key.0));
    let (nonce, body) = ct.split_at(NONCE_BYTES);
    cipher.decrypt(Nonce::from_slice(nonce), body).map_err(|_| PairingError::Integrity)
}
