//! The target group `G_T`: order-`r` subgroup of the norm-one elements of `F_q²`,
//! and the symmetric Tate pairing `e: G × G → G_T`.

use ark_ff::{AdditiveGroup, BigInteger, Field, One, PrimeField, UniformRand, Zero};
use rand::RngCore;

use super::counters;
use super::curve::{fq_from_bytes, fq_to_bytes, GElem, Jacobian, FQ_BYTES};
use super::field::{Fq, Fq2, Scalar, COFACTOR, ORDER};
use super::PairingError;

/// Byte length of a serialized `G_T` element (`c0 || c1`).
pub const GT_BYTES: usize = 2 * FQ_BYTES;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GtElem(pub(crate) Fq2);

impl GtElem {
    pub fn one() -> Self {
        GtElem(Fq2::one())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Counted exponentiation.
    pub fn pow(&self, k: &Scalar) -> GtElem {
        counters::bump_gt_exp();
        GtElem(self.0.pow(k.into_bigint()))
    }

    pub fn mul(&self, other: &GtElem) -> GtElem {
        GtElem(self.0 * other.0)
    }

    /// Inverse of a unitary element is its conjugate.
    pub fn inverse(&self) -> GtElem {
        let mut c = self.0;
        c.conjugate_in_place();
        GtElem(c)
    }

    pub fn div(&self, other: &GtElem) -> GtElem {
        self.mul(&other.inverse())
    }

    /// Uniform element of `G_T` (not counted as a scheme exponentiation).
    pub fn random<R: RngCore>(rng: &mut R) -> GtElem {
        loop {
            let z = Fq2::rand(rng);
            if z.is_zero() {
                continue;
            }
            let mut conj = z;
            conj.conjugate_in_place();
            let unitary = conj * z.inverse().expect("nonzero");
            let out = unitary.pow(COFACTOR);
            if !out.is_one() {
                return GtElem(out);
            }
        }
    }

    pub fn to_bytes(&self) -> [u8; GT_BYTES] {
        let mut out = [0u8; GT_BYTES];
        out[..FQ_BYTES].copy_from_slice(&fq_to_bytes(&self.0.c0));
        out[FQ_BYTES..].copy_from_slice(&fq_to_bytes(&self.0.c1));
        out
    }

    /// Decodes and checks `x^r = 1`.
    pub fn from_bytes(bytes: &[u8]) -> Result<GtElem, PairingError> {
        if bytes.len() != GT_BYTES {
            return Err(PairingError::Length { expected: GT_BYTES, got: bytes.len() });
        }
        let c0 = fq_from_bytes(&bytes[..FQ_BYTES])?;
        let c1 = fq_from_bytes(&bytes[FQ_BYTES..])?;
        let v = Fq2::new(c0, c1);
        if v.is_zero() || !v.pow(ORDER).is_one() {
            return Err(PairingError::NotInGroup("G_T"));
        }
        Ok(GtElem(v))
    }
}

/// Tangent at `t`, evaluated at the distorted point `(-xq, i·yq)`, scaled by `2YZ³ ∈ F_q*`.
fn tangent_line(t: &Jacobian, xq: &Fq, yq: &Fq) -> Fq2 {
    let zz = t.z.square();
    let xx = t.x.square();
    let slope_num = xx.double() + xx + zz.square();
    let real = slope_num * (*xq * zz + t.x) - t.y.square().double();
    let imag = (t.y * t.z * zz).double() * yq;
    Fq2::new(real, imag)
}

/// Chord through `t` and affine `(xp, yp)`, evaluated at `(-xq, i·yq)`, scaled by `Z·(xp Z² - X)`.
fn chord_line(t: &Jacobian, xp: &Fq, yp: &Fq, xq: &Fq, yq: &Fq) -> Fq2 {
    let zz = t.z.square();
    let num = *yp * zz * t.z - t.y;
    let den = t.z * (*xp * zz - t.x);
    Fq2::new(num * (*xq + xp) - *yp * den, *yq * den)
}

fn miller_loop(p: (Fq, Fq), q: (Fq, Fq)) -> Fq2 {
    let (xp, yp) = p;
    let (xq, yq) = q;
    let mut t = Jacobian { x: xp, y: yp, z: Fq::one() };
    let mut f = Fq2::one();
    let bits: Vec<bool> = ORDER.to_bits_be().into_iter().skip_while(|b| !b).collect();
    let last = bits.len() - 1;
    for (idx, bit) in bits.iter().enumerate().skip(1) {
        f = f.square() * tangent_line(&t, &xq, &yq);
        t = t.double();
        if *bit {
            // At the final bit T = -P and the chord is vertical; its value lies in F_q
            // and disappears under the final exponentiation.
            if idx != last {
                f *= chord_line(&t, &xp, &yp, &xq, &yq);
            }
            t = t.add_affine(&xp, &yp);
        }
    }
    f
}

fn final_exponentiation(f: Fq2) -> Fq2 {
    // (q² - 1)/r = (q - 1)·h; the q-power Frobenius on F_q² is conjugation.
    let mut conj = f;
    conj.conjugate_in_place();
    let easy = conj * f.inverse().expect("Miller value is nonzero");
    easy.pow(COFACTOR)
}

/// Uncounted pairing used internally (parameter derivation and tests).
pub(crate) fn pairing_raw(p: &GElem, q: &GElem) -> GtElem {
    match (p.0, q.0) {
        (Some(a), Some(b)) => GtElem(final_exponentiation(miller_loop(a, b))),
        _ => GtElem::one(),
    }
}

/// Symmetric pairing `e(P, Q) = f_{r,P}(φ(Q))^{(q²-1)/r}` with distortion `φ(x, y) = (-x, iy)`.
pub fn pairing(p: &GElem, q: &GElem) -> GtElem {
    counters::bump_pairing();
    pairing_raw(p, q)
}
