//! Bilinear group abstraction over the SS512 Type-A curve, plus the hash,
//! randomness, and symmetric primitives the scheme layers on top.
//!
//! The pairing is symmetric (`G1 = G2 = G`). Callers only see [`GElem`],
//! [`GtElem`], [`Scalar`] and [`pairing`], so an asymmetric backend could be
//! swapped in behind the same names.

pub mod counters;
mod curve;
pub mod field;
mod gt;
pub mod hash;
pub mod rng;
mod scalar;
pub mod sym;

use thiserror::Error;

pub use counters::{measure, OpCounts};
pub use curve::{GElem, G_BYTES};
pub use field::Scalar;
pub use gt::{pairing, GtElem, GT_BYTES};
pub use hash::{hash_to_scalar, hash_to_scalar_tagged, hash_to_symkey};
pub use rng::{child_rng, rng_from_seed, SeededRng};
pub use scalar::{random_nonzero, scalar_from_bytes, scalar_from_i64, scalar_from_u64, scalar_to_bytes, ZP_BYTES};
pub use sym::{sym_decrypt, sym_encrypt, SymKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("unsupported security level: {0}")]
    UnsupportedLevel(String),
    #[error("empty seed")]
    EmptySeed,
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("encoding out of range for {0}")]
    OutOfRange(&'static str),
    #[error("element is not in {0}")]
    NotInGroup(&'static str),
    #[error("symmetric authentication failed")]
    Integrity,
}

/// Supported parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecurityLevel {
    /// Type-A curve `y² = x³ + x`, 512-bit base field, 160-bit group order.
    Ss512,
}

impl SecurityLevel {
    pub fn from_bits(bits: u32) -> Result<Self, PairingError> {
        match bits {
            80 | 512 => Ok(SecurityLevel::Ss512),
            other => Err(PairingError::UnsupportedLevel(other.to_string())),
        }
    }

    pub fn parse(name: &str) -> Result<Self, PairingError> {
        match name.to_ascii_lowercase().as_str() {
            "ss512" | "80" | "512" => Ok(SecurityLevel::Ss512),
            other => Err(PairingError::UnsupportedLevel(other.to_string())),
        }
    }

    /// Security level in bits.
    pub fn bits(&self) -> u32 {
        match self {
            SecurityLevel::Ss512 => 80,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SecurityLevel::Ss512 => "ss512",
        }
    }

    pub fn zp_bytes(&self) -> usize {
        ZP_BYTES
    }

    pub fn g_bytes(&self) -> usize {
        G_BYTES
    }

    pub fn gt_bytes(&self) -> usize {
        GT_BYTES
    }
}

/// Immutable group description shared by all parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub level: SecurityLevel,
    pub seed: Vec<u8>,
    /// Generator of `G`, derived from the seed.
    pub g: GElem,
    /// `e(g, g)`.
    pub egg: GtElem,
}

impl GroupParams {
    pub fn pair(&self, p: &GElem, q: &GElem) -> GtElem {
        pairing(p, q)
    }
}

/// Derives the group from a security level and seed. The same inputs yield
/// byte-identical parameters.
pub fn init_group(level: SecurityLevel, seed: &[u8]) -> Result<GroupParams, PairingError> {
    if seed.is_empty() {
        return Err(PairingError::EmptySeed);
    }
    let g = GElem::hash_to_group(b"RCCPABE-generator-v1", seed);
    let egg = gt::pairing_raw(&g, &g);
    Ok(GroupParams { level, seed: seed.to_vec(), g, egg })
}
