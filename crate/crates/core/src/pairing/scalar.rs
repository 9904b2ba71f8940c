use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use rand::RngCore;

use super::field::Scalar;
use super::PairingError;

/// Byte length of a serialized `Z_p` element.
pub const ZP_BYTES: usize = 20;

pub fn scalar_to_bytes(s: &Scalar) -> [u8; ZP_BYTES] {
    let v = s.into_bigint().to_bytes_be();
    let mut out = [0u8; ZP_BYTES];
    // r < 2^160, so the leading bytes of the 24-byte limb encoding are zero.
    out.copy_from_slice(&v[v.len() - ZP_BYTES..]);
    out
}

/// Strict decoding: rejects values `>= r`.
pub fn scalar_from_bytes(bytes: &[u8]) -> Result<Scalar, PairingError> {
    if bytes.len() != ZP_BYTES {
        return Err(PairingError::Length { expected: ZP_BYTES, got: bytes.len() });
    }
    let mut limbs = [0u64; 3];
    for (i, chunk) in bytes.rchunks(8).enumerate() {
        let mut buf = [0u8; 8];
        buf[8 - chunk.len()..].copy_from_slice(chunk);
        limbs[i] = u64::from_be_bytes(buf);
    }
    Scalar::from_bigint(ark_ff::BigInt::new(limbs)).ok_or(PairingError::OutOfRange("Z_p"))
}

/// Uniform element of `Z_p*`.
pub fn random_nonzero<R: RngCore>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn scalar_from_u64(v: u64) -> Scalar {
    Scalar::from(v)
}

pub fn scalar_from_i64(v: i64) -> Scalar {
    if v < 0 {
        -Scalar::from(v.unsigned_abs())
    } else {
        Scalar::from(v as u64)
    }
}
