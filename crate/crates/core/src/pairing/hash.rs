//! Domain-separated hash oracles `H: {0,1}* → Z_p*` and `H1: {0,1}* → K`.

use ark_ff::{PrimeField, Zero};
use sha2::{Digest, Sha256, Sha512};

use super::field::Scalar;
use super::sym::SymKey;

pub const DST_SCALAR: &[u8] = b"RCCPABE-H-v1";
pub const DST_SYMKEY: &[u8] = b"RCCPABE-H1-v1";

/// `H` with an explicit domain tag. 512-bit digests are reduced mod `r`;
/// a zero result is resampled with the next counter value.
pub fn hash_to_scalar_tagged(dst: &[u8], input: &[u8]) -> Scalar {
    let mut ctr: u32 = 0;
    loop {
        let mut h = Sha512::new();
        h.update((dst.len() as u32).to_be_bytes());
        h.update(dst);
        h.update(ctr.to_be_bytes());
        h.update(input);
        let s = Scalar::from_be_bytes_mod_order(&h.finalize());
        if !s.is_zero() {
            return s;
        }
        ctr += 1;
    }
}

pub fn hash_to_scalar(input: &[u8]) -> Scalar {
    hash_to_scalar_tagged(DST_SCALAR, input)
}

/// `H1`: derives a symmetric key.
pub fn hash_to_symkey(input: &[u8]) -> SymKey {
    let mut h = Sha256::new();
    h.update((DST_SYMKEY.len() as u32).to_be_bytes());
    h.update(DST_SYMKEY);
    h.update(input);
    SymKey(h.finalize().into())
}
