//! Keyword trapdoors, chain-side search and the user's final decryption.

use ark_ff::Field;
use rand::RngCore;

use super::cipher::keyword_scalars;
use super::{CiphertextRecord, KeyId, PublicKeyShadow, SchemeError, SecretKey};
use crate::lsss::ReconstructionPlan;
use crate::pairing::{hash_to_symkey, pairing, random_nonzero, sym_decrypt, GElem, GtElem, Scalar};

/// `TK = (TK0, …, TK5)`; `TK2 = K2` identifies the requesting key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trapdoor {
    pub tk0: Scalar,
    pub tk1: Scalar,
    pub tk2: Scalar,
    pub tk3: Scalar,
    pub tk3p: Scalar,
    pub tk4: Scalar,
    pub tk5: Scalar,
}

impl Trapdoor {
    pub fn key_id(&self) -> KeyId {
        KeyId::from_scalar(&self.tk2)
    }
}

/// Fresh `J, J0` each call, so repeated trapdoors are unlinkable tuples.
pub fn trapdoor<R: RngCore>(sk: &SecretKey, keyword: &[u8], rng: &mut R) -> Result<Trapdoor, SchemeError> {
    if keyword.is_empty() {
        return Err(SchemeError::EmptyKeyword);
    }
    let (w, w0) = keyword_scalars(keyword);
    let j = random_nonzero(rng);
    let j0 = random_nonzero(rng);
    let inv = |s: &Scalar| s.inverse().ok_or_else(|| SchemeError::Structural("zero key scalar".into()));
    let (s1_inv, s2_inv, s3_inv) = (inv(&sk.s1)?, inv(&sk.s2)?, inv(&sk.s3)?);
    Ok(Trapdoor {
        tk0: j * sk.s2 * s1_inv,
        tk1: w * j0 * s1_inv,
        tk2: sk.k2,
        tk3: w * j0 * s2_inv,
        tk3p: j,
        tk4: j0 * sk.k4,
        tk5: w0 * j0 * sk.k4 * s3_inv,
    })
}

/// Partial-decryption bundle returned on a match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub ct0: GtElem,
    /// `Γ^{TK0}`.
    pub gamma: GtElem,
    /// `Λ^{TK3'}`.
    pub lambda: GtElem,
    /// Echo of `TK3'`, so the user need not retain trapdoor randomness.
    pub blind: Scalar,
    pub key_id: KeyId,
    pub enc_payload: Vec<u8>,
    pub flag: bool,
}

/// Runs the match test. `plan` is `None` when the key's attributes do not
/// satisfy the policy, which is a no-match rather than an error.
///
/// Cost: 3 pairings, `2|P| + 1` exponentiations in `G`, 6 in `G_T`.
pub fn search(
    td: &Trapdoor,
    pk: &PublicKeyShadow,
    ct: &CiphertextRecord,
    plan: Option<&ReconstructionPlan>,
) -> Result<Option<SearchResult>, SchemeError> {
    ct.check_shape()?;
    if td.key_id() != pk.key_id {
        return Err(SchemeError::Structural("trapdoor and key shadow belong to different keys".into()));
    }
    let Some(plan) = plan else { return Ok(None) };
    if plan.rows.is_empty() || plan.rows.len() != plan.coefficients.len() {
        return Err(SchemeError::Structural("reconstruction plan shape".into()));
    }
    let mut bases = Vec::with_capacity(plan.rows.len());
    for &row in &plan.rows {
        let label = ct
            .policy
            .row_labels
            .get(row)
            .ok_or_else(|| SchemeError::Structural(format!("plan row {row} out of range")))?;
        let omega = pk
            .omega3
            .get(label)
            .ok_or_else(|| SchemeError::Structural(format!("key shadow lacks attribute `{label}`")))?;
        bases.push(omega.clone());
    }
    let e3: Vec<Scalar> = plan.rows.iter().zip(&plan.coefficients).map(|(r, j)| *j * ct.ct3[*r]).collect();
    let e3p: Vec<Scalar> = plan.rows.iter().zip(&plan.coefficients).map(|(r, j)| *j * ct.ct3p[*r]).collect();

    let gamma = pairing(&pk.omega1, &ct.ct1.pow(&td.tk2).mul(&ct.ct2));
    let lambda = pairing(&ct.ct1, &GElem::product_of_powers(&bases, &e3))
        .mul(&pairing(&ct.ct5, &GElem::product_of_powers(&bases, &e3p)));

    let lhs = pk.omega2.pow(&td.tk5).mul(&gamma.pow(&td.tk1)).mul(&lambda.pow(&td.tk3));
    if lhs != ct.ct4.pow(&td.tk4) {
        return Ok(None);
    }
    Ok(Some(SearchResult {
        ct0: ct.ct0.clone(),
        gamma: gamma.pow(&td.tk0),
        lambda: lambda.pow(&td.tk3p),
        blind: td.tk3p,
        key_id: td.key_id(),
        enc_payload: ct.enc_payload.clone(),
        flag: ct.flag,
    }))
}

/// Recovers the payload from a bundle: one exponentiation in `G_T`, then the
/// symmetric layer. Plaintext-mode records pass straight through.
pub fn decrypt(bundle: &SearchResult, sk: &SecretKey) -> Result<Vec<u8>, SchemeError> {
    if bundle.key_id != sk.key_id() {
        return Err(SchemeError::KeyMismatch);
    }
    if !bundle.flag {
        return Ok(bundle.enc_payload.clone());
    }
    let exp = (sk.k4 * sk.s2 * bundle.blind).inverse().ok_or(SchemeError::KeyMismatch)?;
    let xv = bundle.gamma.mul(&bundle.lambda).pow(&exp);
    let beta = bundle.ct0.div(&xv);
    sym_decrypt(&hash_to_symkey(&beta.to_bytes()), &bundle.enc_payload).map_err(|_| SchemeError::Tamper)
}
