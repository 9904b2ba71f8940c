//! Traceable, context-aware CP-ABE with keyword search.
//!
//! Roles: the trusted authority runs [`global_setup`] and issues keys, data
//! owners [`encrypt`], users derive [`trapdoor`]s, the regional chain runs
//! [`search`] against the user's [`PublicKeyShadow`], and the user finishes
//! with [`decrypt`]. The TA alone can [`trace`] a key back to an identity.

mod authority;
mod cipher;
pub mod format;
mod keys;
mod retrieve;

use thiserror::Error;

use crate::codec::CodecError;
use crate::lsss::PolicyError;
use crate::pairing::PairingError;

pub use ed25519_dalek::VerifyingKey;

pub use authority::{global_setup, CertStatus, Certificate, MasterSecret, PublicParams, SystemKeys, TaRegistry};
pub use cipher::{encrypt, verify_ciphertext, CiphertextRecord, Metadata};
pub use keys::{
    derive_shadow, issue_key, keygen, normalize_attributes, shadow_matches, trace, update_attributes, verify_key,
    AttributeSet, KeyId, RevocationTarget,
    PublicKeyShadow, RevocationEntry, SecretKey,
};
pub use retrieve::{decrypt, search, trapdoor, SearchResult, Trapdoor};

/// Domain tags: every scheme-level hash is separated by purpose.
pub(crate) mod dst {
    pub const IDENTITY: &[u8] = b"RCCPABE-identity-v1";
    pub const ATTRIBUTE: &[u8] = b"RCCPABE-attribute-v1";
    pub const KEY_BIND: &[u8] = b"RCCPABE-keybind-v1";
    pub const KEYWORD: &[u8] = b"RCCPABE-keyword-v1";
    pub const KEYWORD0: &[u8] = b"RCCPABE-keyword0-v1";
    pub const CT_BIND: &[u8] = b"RCCPABE-ctbind-v1";
    pub const U_GEN: &[u8] = b"RCCPABE-u-v1";
    pub const CERT: &[u8] = b"RCCPABE-cert-v1";
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("user id must be nonempty")]
    EmptyId,
    #[error("attribute set must be nonempty")]
    EmptyAttributes,
    #[error("keyword must be nonempty")]
    EmptyKeyword,
    #[error("registration denied: id is revoked")]
    RegistrationDenied,
    #[error("certificate is not valid for key issuance")]
    Unauthorized,
    #[error("malformed input: {0}")]
    Structural(String),
    #[error("symmetric integrity check failed")]
    Tamper,
    #[error("bundle was not produced for this key")]
    KeyMismatch,
    #[error("key does not carry a traceable identity")]
    ForgedKey,
}
