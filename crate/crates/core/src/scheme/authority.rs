//! Trusted-authority state: system parameters and the certificate registry.

use std::collections::BTreeMap;
use std::fmt;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use rand::RngCore;

use super::{dst, SchemeError};
use crate::pairing::{pairing, random_nonzero, GElem, GroupParams, GtElem, Scalar, SymKey, G_BYTES, GT_BYTES};

/// `PP = (g, h, f, u, X, X0)`. `u` is a hashed generator with unknown
/// discrete log, used only for the ciphertext binding element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub group: GroupParams,
    pub h: GElem,
    pub f: GElem,
    pub u: GElem,
    pub x: GtElem,
    pub x0: GtElem,
}

impl PublicParams {
    pub fn g(&self) -> &GElem {
        &self.group.g
    }

    /// The group-element part: `4|G| + 2|G_T|` bytes.
    pub fn element_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * G_BYTES + 2 * GT_BYTES);
        for e in [self.g(), &self.h, &self.f, &self.u] {
            out.extend_from_slice(&e.to_bytes());
        }
        out.extend_from_slice(&self.x.to_bytes());
        out.extend_from_slice(&self.x0.to_bytes());
        out
    }
}

/// `MSK = (a, φ, λ_s, κ1)`.
#[derive(Clone, PartialEq, Eq)]
pub struct MasterSecret {
    pub a: Scalar,
    pub phi: Scalar,
    pub lambda_s: Scalar,
    pub kappa1: SymKey,
}

impl fmt::Debug for MasterSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterSecret(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemKeys {
    pub pp: PublicParams,
    pub msk: MasterSecret,
}

impl SystemKeys {
    /// Recomputes `f`, `h`, `X0` and `X` from the master secret.
    pub fn check_invariants(&self) -> bool {
        let g = self.pp.g();
        let f = g.pow(&self.msk.phi);
        let x0 = pairing(g, &f);
        f == self.pp.f
            && g.pow(&self.msk.lambda_s) == self.pp.h
            && x0 == self.pp.x0
            && x0.pow(&self.msk.a) == self.pp.x
    }
}

pub fn global_setup<R: RngCore>(group: &GroupParams, rng: &mut R) -> SystemKeys {
    let a = random_nonzero(rng);
    let phi = random_nonzero(rng);
    let lambda_s = random_nonzero(rng);
    let kappa1 = SymKey::random(rng);
    let g = &group.g;
    let f = g.pow(&phi);
    let h = g.pow(&lambda_s);
    let u = GElem::hash_to_group(dst::U_GEN, &group.seed);
    let x0 = pairing(g, &f);
    let x = x0.pow(&a);
    SystemKeys {
        pp: PublicParams { group: group.clone(), h, f, u, x, x0 },
        msk: MasterSecret { a, phi, lambda_s, kappa1 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStatus {
    Valid,
    Revoked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub user_id: Vec<u8>,
    pub vehicle_info: Vec<u8>,
    pub attestation: [u8; 64],
    pub status: CertStatus,
}

fn cert_message(id: &[u8], info: &[u8]) -> Vec<u8> {
    let mut m = dst::CERT.to_vec();
    m.extend_from_slice(&(id.len() as u32).to_be_bytes());
    m.extend_from_slice(id);
    m.extend_from_slice(&(info.len() as u32).to_be_bytes());
    m.extend_from_slice(info);
    m
}

impl Certificate {
    /// Checks the attestation only; revocation status lives in the registry.
    pub fn verify(&self, vk: &VerifyingKey) -> bool {
        let sig = Signature::from_bytes(&self.attestation);
        vk.verify(&cert_message(&self.user_id, &self.vehicle_info), &sig).is_ok()
    }

    pub fn user_id_lossy(&self) -> String {
        String::from_utf8_lossy(&self.user_id).into_owned()
    }
}

/// Single-writer registry of issued certificates.
#[derive(Clone)]
pub struct TaRegistry {
    signing: SigningKey,
    certs: BTreeMap<Vec<u8>, Certificate>,
}

impl fmt::Debug for TaRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaRegistry").field("entries", &self.certs.len()).finish_non_exhaustive()
    }
}

impl TaRegistry {
    pub fn new<R: RngCore>(rng: &mut R) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Self::from_parts(seed, Vec::new())
    }

    pub fn from_parts(signing_seed: [u8; 32], certs: Vec<Certificate>) -> Self {
        let certs = certs.into_iter().map(|c| (c.user_id.clone(), c)).collect();
        TaRegistry { signing: SigningKey::from_bytes(&signing_seed), certs }
    }

    pub fn signing_seed(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }

    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.certs.values()
    }

    pub fn len(&self) -> usize {
        self.certs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.certs.is_empty()
    }

    pub fn get(&self, id: &[u8]) -> Option<&Certificate> {
        self.certs.get(id)
    }

    /// Idempotent: re-registering a valid id returns the existing certificate.
    pub fn register(&mut self, id: &[u8], info: &[u8]) -> Result<Certificate, SchemeError> {
        if id.is_empty() {
            return Err(SchemeError::EmptyId);
        }
        if let Some(c) = self.certs.get(id) {
            return match c.status {
                CertStatus::Valid => Ok(c.clone()),
                CertStatus::Revoked => Err(SchemeError::RegistrationDenied),
            };
        }
        let sig = self.signing.sign(&cert_message(id, info));
        let cert = Certificate {
            user_id: id.to_vec(),
            vehicle_info: info.to_vec(),
            attestation: sig.to_bytes(),
            status: CertStatus::Valid,
        };
        self.certs.insert(id.to_vec(), cert.clone());
        Ok(cert)
    }

    /// Returns false if the id was never registered.
    pub fn revoke(&mut self, id: &[u8]) -> bool {
        match self.certs.get_mut(id) {
            Some(c) => {
                c.status = CertStatus::Revoked;
                true
            }
            None => false,
        }
    }

    /// A certificate authorizes issuance when its attestation verifies and
    /// the registry holds it in valid standing.
    pub fn authorize(&self, cert: &Certificate) -> Result<(), SchemeError> {
        let held = self.certs.get(&cert.user_id).ok_or(SchemeError::Unauthorized)?;
        if !cert.verify(&self.verifying_key())
            || held.attestation != cert.attestation
            || held.status != CertStatus::Valid
        {
            return Err(SchemeError::Unauthorized);
        }
        Ok(())
    }
}
