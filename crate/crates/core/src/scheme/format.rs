//! On-disk encodings. Every file starts with a 4-byte magic and a version
//! byte; repeated components are preceded by a u32 count.

use std::collections::BTreeMap;

use super::{
    verify_key, CertStatus, Certificate, CiphertextRecord, KeyId, MasterSecret, Metadata, PublicKeyShadow,
    PublicParams, SchemeError, SearchResult, SecretKey, TaRegistry, Trapdoor,
};
use crate::codec::{CodecError, Reader, Writer};
use crate::lsss::compile_policy;
use crate::pairing::{init_group, SecurityLevel, SymKey, ZP_BYTES};

pub const MAGIC_PP: &[u8; 4] = b"RCPP";
pub const MAGIC_MSK: &[u8; 4] = b"RCMS";
pub const MAGIC_TA: &[u8; 4] = b"RCTA";
pub const MAGIC_CERT: &[u8; 4] = b"RCCE";
pub const MAGIC_SK: &[u8; 4] = b"RCSK";
pub const MAGIC_PK: &[u8; 4] = b"RCPK";
pub const MAGIC_TD: &[u8; 4] = b"RCTD";
pub const MAGIC_CT: &[u8; 4] = b"RCCT";
pub const MAGIC_SR: &[u8; 4] = b"RCSR";

fn invalid(msg: impl Into<String>) -> SchemeError {
    SchemeError::Codec(CodecError::Invalid(msg.into()))
}

fn count(r: &mut Reader<'_>, max: usize) -> Result<usize, SchemeError> {
    let n = r.u32()? as usize;
    if n > max {
        return Err(invalid(format!("component count {n} exceeds {max}")));
    }
    Ok(n)
}

fn key_id(r: &mut Reader<'_>) -> Result<KeyId, SchemeError> {
    Ok(KeyId(r.take(ZP_BYTES)?.try_into().expect("fixed width")))
}

const MAX_COMPONENTS: usize = 4096;

impl PublicParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_PP);
        w.str(self.group.level.name()).bytes(&self.group.seed).raw(&self.element_bytes());
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_PP)?;
        let level = SecurityLevel::parse(&r.string()?)?;
        let group = init_group(level, r.bytes()?)?;
        if r.g()? != group.g {
            return Err(invalid("generator does not match group seed"));
        }
        let (h, f, u) = (r.g()?, r.g()?, r.g()?);
        let (x, x0) = (r.gt()?, r.gt()?);
        r.finish()?;
        Ok(PublicParams { group, h, f, u, x, x0 })
    }
}

impl MasterSecret {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_MSK);
        w.zp(&self.a).zp(&self.phi).zp(&self.lambda_s).raw(&self.kappa1.0);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_MSK)?;
        let (a, phi, lambda_s) = (r.zp()?, r.zp()?, r.zp()?);
        let kappa1 = SymKey(r.take(32)?.try_into().expect("fixed width"));
        r.finish()?;
        Ok(MasterSecret { a, phi, lambda_s, kappa1 })
    }
}

fn put_cert(w: &mut Writer, c: &Certificate) {
    w.bytes(&c.user_id).bytes(&c.vehicle_info).raw(&c.attestation).u8(match c.status {
        CertStatus::Valid => 0,
        CertStatus::Revoked => 1,
    });
}

fn get_cert(r: &mut Reader<'_>) -> Result<Certificate, SchemeError> {
    let user_id = r.bytes()?.to_vec();
    let vehicle_info = r.bytes()?.to_vec();
    let attestation = r.take(64)?.try_into().expect("fixed width");
    let status = match r.u8()? {
        0 => CertStatus::Valid,
        1 => CertStatus::Revoked,
        s => return Err(invalid(format!("certificate status {s}"))),
    };
    Ok(Certificate { user_id, vehicle_info, attestation, status })
}

impl Certificate {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_CERT);
        put_cert(&mut w, self);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_CERT)?;
        let c = get_cert(&mut r)?;
        r.finish()?;
        Ok(c)
    }
}

impl TaRegistry {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_TA);
        w.raw(&self.signing_seed()).u32(self.len() as u32);
        for c in self.certificates() {
            put_cert(&mut w, c);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_TA)?;
        let seed: [u8; 32] = r.take(32)?.try_into().expect("fixed width");
        let n = r.u32()? as usize;
        let certs = (0..n).map(|_| get_cert(&mut r)).collect::<Result<Vec<_>, _>>()?;
        r.finish()?;
        Ok(TaRegistry::from_parts(seed, certs))
    }
}

impl SecretKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_SK);
        w.u32(self.k3.len() as u32).g(&self.k1);
        for (label, k) in &self.k3 {
            w.str(label).g(k);
        }
        w.zp(&self.k2).zp(&self.k4).zp(&self.s1).zp(&self.s2).zp(&self.s3).bytes(&self.identity_blob);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_SK)?;
        let n = count(&mut r, MAX_COMPONENTS)?;
        let k1 = r.g()?;
        let mut k3 = BTreeMap::new();
        for _ in 0..n {
            let label = r.string()?;
            if k3.insert(label, r.g()?).is_some() {
                return Err(invalid("duplicate attribute"));
            }
        }
        let (k2, k4, s1, s2, s3) = (r.zp()?, r.zp()?, r.zp()?, r.zp()?, r.zp()?);
        let identity_blob = r.bytes()?.to_vec();
        r.finish()?;
        Ok(SecretKey { k1, k2, k3, k4, s1, s2, s3, identity_blob })
    }
}

/// [`verify_key`] over an encoded key; anything that fails to decode
/// (wrong lengths, scalars ≥ p, points off the subgroup) is rejected.
pub fn verify_key_encoded(pp: &PublicParams, bytes: &[u8]) -> bool {
    SecretKey::from_bytes(bytes).is_ok_and(|sk| verify_key(pp, &sk))
}

impl PublicKeyShadow {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_PK);
        w.raw(&self.key_id.0).g(&self.omega1).gt(&self.omega2).u32(self.omega3.len() as u32);
        for (label, o) in &self.omega3 {
            w.str(label).g(o);
        }
        w.g(&self.omega4).g(&self.omega5);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_PK)?;
        let key_id = key_id(&mut r)?;
        let omega1 = r.g()?;
        let omega2 = r.gt()?;
        let n = count(&mut r, MAX_COMPONENTS)?;
        let mut omega3 = BTreeMap::new();
        for _ in 0..n {
            let label = r.string()?;
            if omega3.insert(label, r.g()?).is_some() {
                return Err(invalid("duplicate attribute"));
            }
        }
        let (omega4, omega5) = (r.g()?, r.g()?);
        r.finish()?;
        Ok(PublicKeyShadow { key_id, omega1, omega2, omega3, omega4, omega5 })
    }
}

impl Trapdoor {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_TD);
        for s in [&self.tk0, &self.tk1, &self.tk2, &self.tk3, &self.tk3p, &self.tk4, &self.tk5] {
            w.zp(s);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_TD)?;
        let td = Trapdoor {
            tk0: r.zp()?,
            tk1: r.zp()?,
            tk2: r.zp()?,
            tk3: r.zp()?,
            tk3p: r.zp()?,
            tk4: r.zp()?,
            tk5: r.zp()?,
        };
        r.finish()?;
        Ok(td)
    }
}

impl CiphertextRecord {
    /// Canonical encoding; its SHA-256 is the on-chain record id.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_CT);
        w.u32(self.ct3.len() as u32).gt(&self.ct0).g(&self.ct1).g(&self.ct2);
        for s in self.ct3.iter().chain(&self.ct3p) {
            w.zp(s);
        }
        w.gt(&self.ct4).g(&self.ct5).g(&self.ct6);
        w.str(&self.policy.source).str(&self.metadata.to_record()).u8(self.flag as u8).bytes(&self.enc_payload);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_CT)?;
        let l = count(&mut r, MAX_COMPONENTS)?;
        let ct0 = r.gt()?;
        let (ct1, ct2) = (r.g()?, r.g()?);
        let ct3 = (0..l).map(|_| r.zp()).collect::<Result<Vec<_>, _>>()?;
        let ct3p = (0..l).map(|_| r.zp()).collect::<Result<Vec<_>, _>>()?;
        let ct4 = r.gt()?;
        let (ct5, ct6) = (r.g()?, r.g()?);
        let policy = compile_policy(&r.string()?)?;
        let metadata = Metadata::from_record(&r.string()?)?;
        let flag = match r.u8()? {
            0 => false,
            1 => true,
            f => return Err(invalid(format!("flag byte {f}"))),
        };
        let enc_payload = r.bytes()?.to_vec();
        r.finish()?;
        let ct = CiphertextRecord { ct0, ct1, ct2, ct3, ct3p, ct4, ct5, ct6, enc_payload, policy, metadata, flag };
        ct.check_shape()?;
        Ok(ct)
    }
}

impl SearchResult {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::with_header(MAGIC_SR);
        w.gt(&self.ct0).gt(&self.gamma).gt(&self.lambda).zp(&self.blind).raw(&self.key_id.0);
        w.u8(self.flag as u8).bytes(&self.enc_payload);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SchemeError> {
        let mut r = Reader::with_header(bytes, MAGIC_SR)?;
        let (ct0, gamma, lambda) = (r.gt()?, r.gt()?, r.gt()?);
        let blind = r.zp()?;
        let key_id = key_id(&mut r)?;
        let flag = match r.u8()? {
            0 => false,
            1 => true,
            f => return Err(invalid(format!("flag byte {f}"))),
        };
        let enc_payload = r.bytes()?.to_vec();
        r.finish()?;
        Ok(SearchResult { ct0, gamma, lambda, blind, key_id, enc_payload, flag })
    }
}
