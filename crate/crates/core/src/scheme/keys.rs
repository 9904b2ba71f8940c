//! Key issuance, the public search shadow, verification, tracing and
//! attribute updates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ark_ff::{Field, Zero};
use rand::RngCore;

use super::{dst, MasterSecret, PublicParams, SchemeError, SystemKeys, TaRegistry, Certificate};
use crate::lsss::normalize_attribute;
use crate::pairing::{
    hash_to_scalar_tagged, pairing, random_nonzero, scalar_to_bytes, sym_decrypt, sym_encrypt, GElem, GtElem, Scalar,
    ZP_BYTES,
};

pub type AttributeSet = BTreeSet<String>;

/// Canonicalizes `name=value` labels; rejects an empty set.
pub fn normalize_attributes<I, S>(attrs: I) -> Result<AttributeSet, SchemeError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let set = attrs.into_iter().map(|a| normalize_attribute(a.as_ref())).collect::<Result<AttributeSet, _>>()?;
    if set.is_empty() {
        return Err(SchemeError::EmptyAttributes);
    }
    Ok(set)
}

pub(crate) fn attribute_scalar(label: &str) -> Scalar {
    hash_to_scalar_tagged(dst::ATTRIBUTE, label.as_bytes())
}

/// Public identifier of a key: the encoding of `K2`. Trapdoors carry the
/// same value as `TK2`, which is what revocation matches on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KeyId(pub [u8; ZP_BYTES]);

impl KeyId {
    pub fn from_scalar(s: &Scalar) -> Self {
        KeyId(scalar_to_bytes(s))
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 2 * ZP_BYTES || !s.is_ascii() {
            return None;
        }
        let mut out = [0u8; ZP_BYTES];
        for (i, o) in out.iter_mut().enumerate() {
            *o = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok()?;
        }
        Some(KeyId(out))
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyId({})", self.to_hex())
    }
}

/// `SK = (K1, K2, {K3_x}, K4, s1, s2, s3)` plus the encrypted identity whose
/// hash is `K2`.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub k1: GElem,
    pub k2: Scalar,
    pub k3: BTreeMap<String, GElem>,
    pub k4: Scalar,
    pub s1: Scalar,
    pub s2: Scalar,
    pub s3: Scalar,
    pub identity_blob: Vec<u8>,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey").field("id", &self.key_id()).field("attrs", &self.attrs()).finish_non_exhaustive()
    }
}

impl SecretKey {
    pub fn key_id(&self) -> KeyId {
        KeyId::from_scalar(&self.k2)
    }

    pub fn attrs(&self) -> AttributeSet {
        self.k3.keys().cloned().collect()
    }

    /// Binding scalar `t` tying `K1` and `K3` to the key's scalars.
    pub(crate) fn binding(&self) -> Scalar {
        key_binding(&self.k2, &self.k4, &self.s1, &self.s2, &self.s3)
    }

    /// Group/scalar part: `(|A_s|+1)|G| + 5|Z_p|` bytes.
    pub fn element_bytes(&self) -> Vec<u8> {
        let mut out = self.k1.to_bytes().to_vec();
        for e in self.k3.values() {
            out.extend_from_slice(&e.to_bytes());
        }
        for s in [&self.k2, &self.k4, &self.s1, &self.s2, &self.s3] {
            out.extend_from_slice(&scalar_to_bytes(s));
        }
        out
    }
}

fn key_binding(k2: &Scalar, k4: &Scalar, s1: &Scalar, s2: &Scalar, s3: &Scalar) -> Scalar {
    let mut buf = Vec::with_capacity(5 * ZP_BYTES);
    for s in [k2, k4, s1, s2, s3] {
        buf.extend_from_slice(&scalar_to_bytes(s));
    }
    hash_to_scalar_tagged(dst::KEY_BIND, &buf)
}

/// Search-side public counterpart of a [`SecretKey`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKeyShadow {
    pub key_id: KeyId,
    pub omega1: GElem,
    pub omega2: GtElem,
    pub omega3: BTreeMap<String, GElem>,
    pub omega4: GElem,
    pub omega5: GElem,
}

impl PublicKeyShadow {
    pub fn attrs(&self) -> AttributeSet {
        self.omega3.keys().cloned().collect()
    }
}

/// Issues the secret key alone: exactly `|attrs| + 1` exponentiations in `G`.
pub fn issue_key<R: RngCore>(
    keys: &SystemKeys,
    user_id: &[u8],
    attrs: &AttributeSet,
    rng: &mut R,
) -> Result<SecretKey, SchemeError> {
    if user_id.is_empty() {
        return Err(SchemeError::EmptyId);
    }
    if attrs.is_empty() {
        return Err(SchemeError::EmptyAttributes);
    }
    let MasterSecret { a, phi, lambda_s, kappa1 } = &keys.msk;
    let (blob, k2, den) = loop {
        let blob = sym_encrypt(kappa1, user_id, rng);
        let y = hash_to_scalar_tagged(dst::IDENTITY, &blob);
        let den = *lambda_s + y;
        if !den.is_zero() {
            break (blob, y, den);
        }
    };
    let k4 = random_nonzero(rng);
    let (s1, s2, s3) = (random_nonzero(rng), random_nonzero(rng), random_nonzero(rng));
    let t = key_binding(&k2, &k4, &s1, &s2, &s3);

    let mut exps = Vec::with_capacity(attrs.len());
    for label in attrs {
        let inv = (attribute_scalar(label) + phi)
            .inverse()
            .ok_or_else(|| SchemeError::Structural(format!("attribute `{label}` collides with the master secret")))?;
        exps.push((label.clone(), t * inv));
    }
    let g = keys.pp.g();
    let k1 = g.pow(&((*a * phi - t) * den.inverse().expect("nonzero")));
    let k3 = exps.into_iter().map(|(l, e)| (l, g.pow(&e))).collect();
    Ok(SecretKey { k1, k2, k3, k4, s1, s2, s3, identity_blob: blob })
}

/// Derives `(Ω1 … Ω5)` from a secret key.
pub fn derive_shadow(pp: &PublicParams, sk: &SecretKey) -> PublicKeyShadow {
    let r1 = sk.k4 * sk.s1;
    let r2 = sk.k4 * sk.s2;
    PublicKeyShadow {
        key_id: sk.key_id(),
        omega1: sk.k1.pow(&r1),
        omega2: pp.x.pow(&sk.s3),
        omega3: sk.k3.iter().map(|(l, k)| (l.clone(), k.pow(&r2))).collect(),
        omega4: pp.g().pow(&r1),
        omega5: pp.g().pow(&r2),
    }
}

/// Full key generation for a registered user: authorization, secret key,
/// then its public shadow.
pub fn keygen<R: RngCore>(
    keys: &SystemKeys,
    registry: &TaRegistry,
    cert: &Certificate,
    attrs: &AttributeSet,
    rng: &mut R,
) -> Result<(SecretKey, PublicKeyShadow), SchemeError> {
    registry.authorize(cert)?;
    let sk = issue_key(keys, &cert.user_id, attrs, rng)?;
    let pk = derive_shadow(&keys.pp, &sk);
    Ok((sk, pk))
}

/// Pairing check that a shadow was derived from `sk`.
pub fn shadow_matches(pp: &PublicParams, sk: &SecretKey, pk: &PublicKeyShadow) -> bool {
    let g = pp.g();
    pk.key_id == sk.key_id()
        && pk.omega3.len() == sk.k3.len()
        && pairing(&pk.omega4, &sk.k1) == pairing(&pk.omega1, g)
        && pk.omega2 == pp.x.pow(&sk.s3)
        && sk.k3.iter().all(|(l, k)| {
            pk.omega3.get(l).is_some_and(|o| pairing(&pk.omega5, k) == pairing(o, g))
        })
}

/// Structural checks, then `e(K1, h·g^{K2})·e(g,g)^t = X` and
/// `Π_x e(K3_x, g^x·f) = e(g,g)^{t·|A_s|}`.
pub fn verify_key(pp: &PublicParams, sk: &SecretKey) -> bool {
    let scalars_ok = [&sk.k2, &sk.k4, &sk.s1, &sk.s2, &sk.s3].iter().all(|s| !s.is_zero());
    let elems_ok = std::iter::once(&sk.k1)
        .chain(sk.k3.values())
        .all(|e| !e.is_identity() && e.is_on_curve() && e.in_subgroup());
    let labels_ok = sk.k3.keys().all(|l| normalize_attribute(l).as_deref() == Ok(l.as_str()));
    if !scalars_ok || !elems_ok || !labels_ok || sk.k3.is_empty() {
        return false;
    }
    if hash_to_scalar_tagged(dst::IDENTITY, &sk.identity_blob) != sk.k2 {
        return false;
    }
    let g = pp.g();
    let t_gt = pp.group.egg.pow(&sk.binding());
    let lhs = pairing(&sk.k1, &pp.h.mul(&g.pow(&sk.k2))).mul(&t_gt);
    if lhs != pp.x {
        return false;
    }
    let mut acc = GtElem::one();
    for (label, k3) in &sk.k3 {
        acc = acc.mul(&pairing(k3, &g.pow(&attribute_scalar(label)).mul(&pp.f)));
    }
    acc == t_gt.pow(&Scalar::from(sk.k3.len() as u64))
}

/// Recovers the user id embedded in `K2`. Only the TA holds `κ1`.
pub fn trace(msk: &MasterSecret, sk: &SecretKey) -> Result<Vec<u8>, SchemeError> {
    if hash_to_scalar_tagged(dst::IDENTITY, &sk.identity_blob) != sk.k2 {
        return Err(SchemeError::ForgedKey);
    }
    sym_decrypt(&msk.kappa1, &sk.identity_blob).map_err(|_| SchemeError::ForgedKey)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RevocationTarget {
    /// A single key, matched against `TK2` at search time.
    Key(KeyId),
    /// Every key of a user; uploads and registrations are refused.
    User(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationEntry {
    pub target: RevocationTarget,
    pub reason: String,
}

/// Re-issues a key over `new_attrs` for the same identity and emits the
/// entry that retires the old one.
pub fn update_attributes<R: RngCore>(
    keys: &SystemKeys,
    sk_old: &SecretKey,
    new_attrs: &AttributeSet,
    rng: &mut R,
) -> Result<(SecretKey, PublicKeyShadow, RevocationEntry), SchemeError> {
    if new_attrs.is_empty() {
        return Err(SchemeError::EmptyAttributes);
    }
    let id = trace(&keys.msk, sk_old)?;
    let sk = issue_key(keys, &id, new_attrs, rng)?;
    let pk = derive_shadow(&keys.pp, &sk);
    let entry = RevocationEntry { target: RevocationTarget::Key(sk_old.key_id()), reason: "attribute-update".into() };
    Ok((sk, pk, entry))
}
