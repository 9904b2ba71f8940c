//! Context-aware encryption: one ciphertext shape for both security modes.

use std::fmt;

use ark_ff::Field;
use rand::RngCore;

use super::keys::attribute_scalar;
use super::{dst, PublicParams, SchemeError};
use crate::lsss::{share_secret, AccessPolicy};
use crate::pairing::{
    hash_to_scalar_tagged, hash_to_symkey, pairing, random_nonzero, scalar_to_bytes, sym_encrypt, GElem, GtElem,
    Scalar, G_BYTES, GT_BYTES, ZP_BYTES,
};

/// Context carried next to a ciphertext; `time` is seconds since the epoch.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Metadata {
    pub event: String,
    pub region: String,
    pub time: u64,
}

impl Metadata {
    pub fn new(event: impl Into<String>, region: impl Into<String>, time: u64) -> Self {
        Metadata { event: event.into(), region: region.into(), time }
    }

    /// Canonical `key=value` record, one field per line.
    pub fn to_record(&self) -> String {
        format!("event={}\nregion={}\ntime={}\n", self.event, self.region, self.time)
    }

    pub fn from_record(s: &str) -> Result<Self, SchemeError> {
        let bad = |m: &str| SchemeError::Structural(format!("metadata record: {m}"));
        let mut lines = s.lines();
        let mut field = |k: &str| -> Result<String, SchemeError> {
            let line = lines.next().ok_or_else(|| bad("missing field"))?;
            line.strip_prefix(k)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| bad(&format!("expected `{k}=`")))
        };
        let event = field("event")?;
        let region = field("region")?;
        let time = field("time")?.parse().map_err(|_| bad("time is not an integer"))?;
        let md = Metadata { event, region, time };
        md.validate()?;
        Ok(md)
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        for (k, v) in [("event", &self.event), ("region", &self.region)] {
            if v.is_empty() || v.contains(['\n', '\r']) {
                return Err(SchemeError::Structural(format!("metadata field `{k}` must be a nonempty single line")));
            }
        }
        Ok(())
    }
}

/// `CT = (CT0, CT1, CT2, {CT3_i}, {CT'3_i}, CT4, CT5, CT6, Enc_data)`.
/// `CT5 = f^v` completes the attribute check; `CT6` binds every other part
/// so chains can reject mangled uploads without any key.
#[derive(Clone, PartialEq, Eq)]
pub struct CiphertextRecord {
    pub ct0: GtElem,
    pub ct1: GElem,
    pub ct2: GElem,
    pub ct3: Vec<Scalar>,
    pub ct3p: Vec<Scalar>,
    pub ct4: GtElem,
    pub ct5: GElem,
    pub ct6: GElem,
    pub enc_payload: Vec<u8>,
    pub policy: AccessPolicy,
    pub metadata: Metadata,
    pub flag: bool,
}

impl fmt::Debug for CiphertextRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CiphertextRecord")
            .field("policy", &self.policy.source)
            .field("metadata", &self.metadata)
            .field("flag", &self.flag)
            .field("payload_len", &self.enc_payload.len())
            .finish_non_exhaustive()
    }
}

impl CiphertextRecord {
    /// Group/scalar part: `4|G| + 2|G_T| + 2L|Z_p|` bytes.
    pub fn element_bytes(&self) -> Vec<u8> {
        let l = self.ct3.len();
        let mut out = Vec::with_capacity(4 * G_BYTES + 2 * GT_BYTES + 2 * l * ZP_BYTES);
        self.unbound_elements(&mut out);
        out.extend_from_slice(&self.ct6.to_bytes());
        out
    }

    fn unbound_elements(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.ct0.to_bytes());
        out.extend_from_slice(&self.ct1.to_bytes());
        out.extend_from_slice(&self.ct2.to_bytes());
        for s in self.ct3.iter().chain(&self.ct3p) {
            out.extend_from_slice(&scalar_to_bytes(s));
        }
        out.extend_from_slice(&self.ct4.to_bytes());
        out.extend_from_slice(&self.ct5.to_bytes());
    }

    /// Hash of everything except `CT6`.
    pub(crate) fn binding_scalar(&self) -> Scalar {
        let mut buf = Vec::new();
        self.unbound_elements(&mut buf);
        for part in [self.policy.source.as_bytes(), self.metadata.to_record().as_bytes(), &self.enc_payload] {
            buf.extend_from_slice(&(part.len() as u32).to_be_bytes());
            buf.extend_from_slice(part);
        }
        buf.push(self.flag as u8);
        hash_to_scalar_tagged(dst::CT_BIND, &buf)
    }

    pub fn check_shape(&self) -> Result<(), SchemeError> {
        let l = self.policy.rows();
        if l == 0 || self.ct3.len() != l || self.ct3p.len() != l {
            return Err(SchemeError::Structural(format!(
                "policy has {l} rows but ciphertext carries {}/{} row components",
                self.ct3.len(),
                self.ct3p.len()
            )));
        }
        self.metadata.validate()
    }
}

pub(crate) fn keyword_scalars(keyword: &[u8]) -> (Scalar, Scalar) {
    (hash_to_scalar_tagged(dst::KEYWORD, keyword), hash_to_scalar_tagged(dst::KEYWORD0, keyword))
}

/// Encrypts under `policy` with a searchable `keyword`. With `flag` false the
/// payload is stored verbatim but the tuple is otherwise identical.
///
/// Cost: 4 exponentiations in `G` and 3 in `G_T`, independent of `L`.
pub fn encrypt<R: RngCore>(
    pp: &PublicParams,
    data: &[u8],
    policy: &AccessPolicy,
    keyword: &[u8],
    flag: bool,
    metadata: &Metadata,
    rng: &mut R,
) -> Result<CiphertextRecord, SchemeError> {
    if keyword.is_empty() {
        return Err(SchemeError::EmptyKeyword);
    }
    if policy.rows() == 0 {
        return Err(SchemeError::Policy(crate::lsss::PolicyError::Empty));
    }
    metadata.validate()?;

    let beta = GtElem::random(rng);
    let v = random_nonzero(rng);
    let v_inv = v.inverse().expect("nonzero");
    let shares = share_secret(policy, v, rng);
    let ct3p: Vec<Scalar> = shares.shares.iter().map(|s| *s * v_inv).collect();
    let ct3 = ct3p.iter().zip(&policy.row_labels).map(|(u, l)| attribute_scalar(l) * u).collect();

    let (w, w0) = keyword_scalars(keyword);
    let enc_payload = if flag { sym_encrypt(&hash_to_symkey(&beta.to_bytes()), data, rng) } else { data.to_vec() };

    let mut ct = CiphertextRecord {
        ct0: beta.mul(&pp.x.pow(&v)),
        ct1: pp.g().pow(&v),
        ct2: pp.h.pow(&v),
        ct3,
        ct3p,
        ct4: pp.x.pow(&w0).mul(&pp.x.pow(&(v * w))),
        ct5: pp.f.pow(&v),
        ct6: GElem::identity(),
        enc_payload,
        policy: policy.clone(),
        metadata: metadata.clone(),
        flag,
    };
    let m = ct.binding_scalar();
    let exp = (v + m).inverse().ok_or_else(|| SchemeError::Structural("degenerate binding scalar".into()))?;
    ct.ct6 = pp.u.pow(&exp);
    Ok(ct)
}

/// Keyless upload check: shape, then `e(CT6, CT1·g^m) = e(u, g)`.
pub fn verify_ciphertext(pp: &PublicParams, ct: &CiphertextRecord) -> Result<(), SchemeError> {
    ct.check_shape()?;
    if ct.ct1.is_identity() || ct.ct6.is_identity() {
        return Err(SchemeError::Structural("identity element in ciphertext".into()));
    }
    let m = ct.binding_scalar();
    let lhs = pairing(&ct.ct6, &ct.ct1.mul(&pp.g().pow(&m)));
    if lhs != pairing(&pp.u, pp.g()) {
        return Err(SchemeError::Structural("ciphertext binding check failed".into()));
    }
    Ok(())
}
