//! Prime fields of the SS512 Type-A parameter set.
//!
//! The base field has a 512-bit characteristic `q ≡ 3 (mod 4)`, so `-1` is a
//! non-residue and `F_q² = F_q[i]/(i² + 1)`. The scalar field is the 160-bit
//! Solinas prime `r = 2^159 + 2^107 + 1`, and `q + 1 = h·r`.

use ark_ff::fields::{Fp192, Fp2, Fp2Config, Fp512, MontBackend, MontConfig};
use ark_ff::{BigInt, MontFp};

#[derive(MontConfig)]
#[modulus = "8780710799663312522437781984754049815806883199414208211028653399266475630880222957078625179422662221423155858769582317459277713367317481324925129998224791"]
#[generator = "11"]
pub struct FqConfig;

/// Base field element.
pub type Fq = Fp512<MontBackend<FqConfig, 8>>;

#[derive(MontConfig)]
#[modulus = "730750818665451621361119245571504901405976559617"]
#[generator = "3"]
pub struct FrConfig;

/// Element of `Z_p`, the exponent field shared by `G` and `G_T`.
pub type Scalar = Fp192<MontBackend<FrConfig, 3>>;

pub struct Fq2Config;

impl Fp2Config for Fq2Config {
    type Fp = Fq;
    const NONRESIDUE: Fq = MontFp!("-1");
    const FROBENIUS_COEFF_FP2_C1: &'static [Fq] = &[MontFp!("1"), MontFp!("-1")];
}

pub type Fq2 = Fp2<Fq2Config>;

/// Cofactor `h = (q + 1) / r`.
pub const COFACTOR: BigInt<6> = BigInt!("12016012264891146079388821366740534204802954401251311822919615131047207289359704531102844802183906537786776");

/// Scalar-field modulus as a big integer.
pub const ORDER: BigInt<3> = BigInt!("730750818665451621361119245571504901405976559617");

