//! The source group `G`: the order-`r` subgroup of `E: y² = x³ + x` over `F_q`.

use ark_ff::{AdditiveGroup, BigInteger, Field, One, PrimeField, Zero};
use sha2::{Digest, Sha512};

use super::counters;
use super::field::{Fq, Scalar, COFACTOR, ORDER};
use super::PairingError;

/// Byte length of a base-field coordinate.
pub const FQ_BYTES: usize = 64;
/// Byte length of a serialized `G` element (affine `x || y`).
pub const G_BYTES: usize = 2 * FQ_BYTES;

/// Affine point of the source group. `None` is the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GElem(pub(crate) Option<(Fq, Fq)>);

/// Jacobian coordinates: `x = X/Z²`, `y = Y/Z³`; `Z = 0` is infinity.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Jacobian {
    pub x: Fq,
    pub y: Fq,
    pub z: Fq,
}

impl Jacobian {
    pub fn infinity() -> Self {
        Jacobian { x: Fq::one(), y: Fq::one(), z: Fq::zero() }
    }

    pub fn is_infinity(&self) -> bool {
        self.z.is_zero()
    }

    pub fn from_affine(p: &GElem) -> Self {
        match p.0 {
            None => Self::infinity(),
            Some((x, y)) => Jacobian { x, y, z: Fq::one() },
        }
    }

    pub fn to_affine(&self) -> GElem {
        if self.is_infinity() {
            return GElem(None);
        }
        let zinv = self.z.inverse().expect("nonzero z");
        let zinv2 = zinv.square();
        GElem(Some((self.x * zinv2, self.y * zinv2 * zinv)))
    }

    /// dbl-2007-bl with curve coefficient a = 1.
    pub fn double(&self) -> Self {
        if self.is_infinity() || self.y.is_zero() {
            return Self::infinity();
        }
        let xx = self.x.square();
        let yy = self.y.square();
        let yyyy = yy.square();
        let zz = self.z.square();
        let s = ((self.x + yy).square() - xx - yyyy).double();
        let m = xx.double() + xx + zz.square();
        let t = m.square() - s.double();
        let y3 = m * (s - t) - yyyy.double().double().double();
        let z3 = (self.y + self.z).square() - yy - zz;
        Jacobian { x: t, y: y3, z: z3 }
    }

    /// madd-2007-bl: `self + (x2, y2)` with the second operand affine.
    pub fn add_affine(&self, x2: &Fq, y2: &Fq) -> Self {
        if self.is_infinity() {
            return Jacobian { x: *x2, y: *y2, z: Fq::one() };
        }
        let z1z1 = self.z.square();
        let u2 = *x2 * z1z1;
        let s2 = *y2 * self.z * z1z1;
        let h = u2 - self.x;
        let rr = (s2 - self.y).double();
        if h.is_zero() {
            return if rr.is_zero() { self.double() } else { Self::infinity() };
        }
        let hh = h.square();
        let i = hh.double().double();
        let j = h * i;
        let v = self.x * i;
        let x3 = rr.square() - j - v.double();
        let y3 = rr * (v - x3) - (self.y * j).double();
        let z3 = (self.z + h).square() - z1z1 - hh;
        Jacobian { x: x3, y: y3, z: z3 }
    }

    pub fn add(&self, other: &Jacobian) -> Self {
        if other.is_infinity() {
            return *self;
        }
        if self.is_infinity() {
            return *other;
        }
        // add-2007-bl
        let z1z1 = self.z.square();
        let z2z2 = other.z.square();
        let u1 = self.x * z2z2;
        let u2 = other.x * z1z1;
        let s1 = self.y * other.z * z2z2;
        let s2 = other.y * self.z * z1z1;
        let h = u2 - u1;
        let rr = (s2 - s1).double();
        if h.is_zero() {
            return if rr.is_zero() { self.double() } else { Self::infinity() };
        }
        let i = h.double().square();
        let j = h * i;
        let v = u1 * i;
        let x3 = rr.square() - j - v.double();
        let y3 = rr * (v - x3) - (s1 * j).double();
        let z3 = ((self.z + other.z).square() - z1z1 - z2z2) * h;
        Jacobian { x: x3, y: y3, z: z3 }
    }
}

/// Double-and-add over the big-endian bits of `limbs` (little-endian u64 limbs).
pub(crate) fn mul_bits(p: &GElem, limbs: &[u64]) -> GElem {
    let Some((px, py)) = p.0 else { return GElem(None) };
    let mut acc = Jacobian::infinity();
    let mut started = false;
    for limb in limbs.iter().rev() {
        for bit in (0..64).rev() {
            if started {
                acc = acc.double();
            }
            if (limb >> bit) & 1 == 1 {
                acc = acc.add_affine(&px, &py);
                started = true;
            }
        }
    }
    acc.to_affine()
}

impl GElem {
    pub fn identity() -> Self {
        GElem(None)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_none()
    }

    pub fn is_on_curve(&self) -> bool {
        match self.0 {
            None => true,
            Some((x, y)) => y.square() == x.square() * x + x,
        }
    }

    /// `r·P = O`.
    pub fn in_subgroup(&self) -> bool {
        self.is_on_curve() && mul_bits(self, ORDER.as_ref()).is_identity()
    }

    /// Exponentiation `P^k` written multiplicatively (scalar multiplication). Counted.
    pub fn pow(&self, k: &Scalar) -> GElem {
        counters::bump_g_exp();
        mul_bits(self, k.into_bigint().as_ref())
    }

    /// Group operation (point addition, written multiplicatively in the scheme).
    pub fn mul(&self, other: &GElem) -> GElem {
        match other.0 {
            None => *self,
            Some((x, y)) => Jacobian::from_affine(self).add_affine(&x, &y).to_affine(),
        }
    }

    pub fn inverse(&self) -> GElem {
        GElem(self.0.map(|(x, y)| (x, -y)))
    }

    /// `Π bases[i]^exps[i]`, counting one exponentiation per base.
    pub fn product_of_powers(bases: &[GElem], exps: &[Scalar]) -> GElem {
        assert_eq!(bases.len(), exps.len());
        let mut acc = Jacobian::infinity();
        for (b, e) in bases.iter().zip(exps) {
            counters::bump_g_exp();
            acc = acc.add(&Jacobian::from_affine(&mul_bits(b, e.into_bigint().as_ref())));
        }
        acc.to_affine()
    }

    /// Deterministic map from bytes into the order-`r` subgroup (try-and-increment,
    /// then cofactor clearing). Never returns the identity.
    pub fn hash_to_group(dst: &[u8], msg: &[u8]) -> GElem {
        let mut ctr: u32 = 0;
        loop {
            let mut hasher = Sha512::new();
            hasher.update((dst.len() as u32).to_be_bytes());
            hasher.update(dst);
            hasher.update(msg);
            hasher.update(ctr.to_be_bytes());
            let digest = hasher.finalize();
            ctr += 1;
            let x = Fq::from_be_bytes_mod_order(&digest);
            let rhs = x.square() * x + x;
            let Some(mut y) = rhs.sqrt() else { continue };
            if digest[0] & 1 == 1 {
                y = -y;
            }
            let p = mul_bits(&GElem(Some((x, y))), COFACTOR.as_ref());
            if !p.is_identity() {
                return p;
            }
        }
    }

    /// Fixed-width encoding: `x || y`, big-endian; all-zero bytes encode infinity.
    pub fn to_bytes(&self) -> [u8; G_BYTES] {
        let mut out = [0u8; G_BYTES];
        if let Some((x, y)) = self.0 {
            out[..FQ_BYTES].copy_from_slice(&fq_to_bytes(&x));
            out[FQ_BYTES..].copy_from_slice(&fq_to_bytes(&y));
        }
        out
    }

    /// Decodes and checks curve and subgroup membership.
    pub fn from_bytes(bytes: &[u8]) -> Result<GElem, PairingError> {
        let p = Self::from_bytes_unchecked(bytes)?;
        if !p.in_subgroup() {
            return Err(PairingError::NotInGroup("G"));
        }
        Ok(p)
    }

    /// Decodes and checks only that the point lies on the curve.
    pub fn from_bytes_unchecked(bytes: &[u8]) -> Result<GElem, PairingError> {
        if bytes.len() != G_BYTES {
            return Err(PairingError::Length { expected: G_BYTES, got: bytes.len() });
        }
        if bytes.iter().all(|b| *b == 0) {
            return Ok(GElem(None));
        }
        let x = fq_from_bytes(&bytes[..FQ_BYTES])?;
        let y = fq_from_bytes(&bytes[FQ_BYTES..])?;
        let p = GElem(Some((x, y)));
        if !p.is_on_curve() {
            return Err(PairingError::NotInGroup("E(F_q)"));
        }
        Ok(p)
    }
}

pub(crate) fn fq_to_bytes(x: &Fq) -> [u8; FQ_BYTES] {
    let v = x.into_bigint().to_bytes_be();
    let mut out = [0u8; FQ_BYTES];
    out[FQ_BYTES - v.len()..].copy_from_slice(&v);
    out
}

pub(crate) fn fq_from_bytes(bytes: &[u8]) -> Result<Fq, PairingError> {
    let mut limbs = [0u64; 8];
    for (i, chunk) in bytes.rchunks(8).enumerate() {
        let mut buf = [0u8; 8];
        buf[8 - chunk.len()..].copy_from_slice(chunk);
        limbs[i] = u64::from_be_bytes(buf);
    }
    Fq::from_bigint(ark_ff::BigInt::new(limbs)).ok_or(PairingError::OutOfRange("F_q"))
}
