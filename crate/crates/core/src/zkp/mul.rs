//! Proof that `e_gamma` encrypts `alpha * beta`.
//!
//! ```text
//! prover:   d, r_d, r_dbeta random
//!           e_d = E(d, r_d),  e_dbeta = E(d beta, r_dbeta)
//!           v  = u alpha + d mod n
//!           r1 = r_alpha^u r_d
//!           r2 = r_beta^v (r_dbeta r_gamma^u)^-1
//! verifier: e_alpha^u e_d                     = E(v, r1)
//!           e_beta^v (e_dbeta e_gamma^u)^-1   = E(0, r2)
//! ```
//!
//! `u` binds the context, the key, `e_alpha` and `e_d` only. In the
//! distributed variant the rater must fix `v = u z + d` before `e_beta`,
//! `e_gamma` and `e_dbeta` exist.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::{derive_challenge, Crs, ZkpError};
use crate::crypto::{mod_inverse, Ciphertext, PublicKey};
use crate::transport::{Canonical, CodecError, Decoder, Encoder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulStatement {
    pub e_alpha: Ciphertext,
    pub e_beta: Ciphertext,
    pub e_gamma: Ciphertext,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulProof {
    pub e_d: Ciphertext,
    pub e_dbeta: Ciphertext,
    pub v: BigUint,
    pub r1: BigUint,
    pub r2: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulWitness {
    pub alpha: BigUint,
    pub r_alpha: BigUint,
    pub beta: BigUint,
    pub r_beta: BigUint,
    pub gamma: BigUint,
    pub r_gamma: BigUint,
}

/// Challenge for a multiplication proof.
pub fn mul_challenge(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    e_alpha: &Ciphertext,
    e_d: &Ciphertext,
) -> BigUint {
    let mut enc = Encoder::new();
    enc.bytes(context).put(pk).put(e_alpha).put(e_d);
    derive_challenge(crs, &enc.finish())
}

pub fn prove_mul<R: Rng + ?Sized>(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    w: &MulWitness,
    rng: &mut R,
) -> Result<(MulStatement, MulProof), ZkpError> {
    let n = pk.n();
    let n2 = pk.n_squared();
    if (&w.alpha * &w.beta) % n != w.gamma {
        return Err(ZkpError::WitnessInconsistent);
    }
    let statement = MulStatement {
        e_alpha: pk.encrypt(&w.alpha, &w.r_alpha)?,
        e_beta: pk.encrypt(&w.beta, &w.r_beta)?,
        e_gamma: pk.encrypt(&w.gamma, &w.r_gamma)?,
    };
    let d = pk.random_plaintext(rng);
    let r_d = pk.random_unit(rng);
    let r_dbeta = pk.random_unit(rng);
    let e_d = pk.encrypt(&d, &r_d)?;
    let e_dbeta = pk.encrypt(&((&d * &w.beta) % n), &r_dbeta)?;
    let u = mul_challenge(pk, crs, context, &statement.e_alpha, &e_d);
    let v = (&u * &w.alpha + &d) % n;
    let r1 = (w.r_alpha.modpow(&u, n2) * &r_d) % n2;
    let denom = (&r_dbeta * w.r_gamma.modpow(&u, n2)) % n2;
    let r2 = (w.r_beta.modpow(&v, n2) * mod_inverse(&denom, n2)?) % n2;
    Ok((
        statement,
        MulProof {
            e_d,
            e_dbeta,
            v,
            r1,
            r2,
        },
    ))
}

/// Checks both equations bit-exactly.
pub fn verify_mul(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    s: &MulStatement,
    proof: &MulProof,
) -> bool {
    verify_with(pk, crs, context, s, proof, &s.e_gamma)
}

/// The second equation with `e_alpha^u` in place of `e_gamma^u`. Its plaintext residue is `u z (b - 1)`, so it
/// rejects every honest proof with `b = 0`. Kept for comparison only.
pub fn verify_mul_literal(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    s: &MulStatement,
    proof: &MulProof,
) -> bool {
    verify_with(pk, crs, context, s, proof, &s.e_alpha)
}

fn verify_with(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    s: &MulStatement,
    proof: &MulProof,
    gamma_term: &Ciphertext,
) -> bool {
    let n2 = pk.n_squared();
    let keyed = [
        &s.e_alpha,
        &s.e_beta,
        &s.e_gamma,
        &proof.e_d,
        &proof.e_dbeta,
    ]
    .iter()
    .all(|c| c.key() == pk.id() && c.value() < n2 && !c.value().is_zero());
    if !keyed || &proof.v >= pk.n() || &proof.r1 >= n2 || &proof.r2 >= n2 {
        return false;
    }
    let u = mul_challenge(pk, crs, context, &s.e_alpha, &proof.e_d);
    let check = || -> Result<bool, ZkpError> {
        let lhs1 = pk.add(&pk.smul(&s.e_alpha, &u)?, &proof.e_d)?;
        let rhs1 = pk.encrypt(&proof.v, &proof.r1)?;
        if lhs1 != rhs1 {
            return Ok(false);
        }
        let inner = pk.add(&proof.e_dbeta, &pk.smul(gamma_term, &u)?)?;
        let lhs2 = pk.sub(&pk.smul(&s.e_beta, &proof.v)?, &inner)?;
        let rhs2 = pk.encrypt(&BigUint::zero(), &proof.r2)?;
        Ok(lhs2 == rhs2)
    };
    check().unwrap_or(false)
}

impl Canonical for MulStatement {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.put(&self.e_alpha).put(&self.e_beta).put(&self.e_gamma);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            e_alpha: dec.get()?,
            e_beta: dec.get()?,
            e_gamma: dec.get()?,
        })
    }
}

impl Canonical for MulProof {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.put(&self.e_d)
            .put(&self.e_dbeta)
            .uint(&self.v)
            .uint(&self.r1)
            .uint(&self.r2);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            e_d: dec.get()?,
            e_dbeta: dec.get()?,
            v: dec.uint()?,
            r1: dec.uint()?,
            r2: dec.uint()?,
        })
    }
}
