//! Proof that a ciphertext encrypts 0 or 1.
//!
//! `c` encrypts `j` iff `c g^-j` is an n-th residue mod `n^2`. The proof is
//! the OR of two n-th-residuosity sigma protocols: the true branch is run
//! honestly, the other is simulated, and the two challenges must add up to
//! the hashed challenge mod `2^128`.

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;

use super::{challenge_modulus, hash_challenge, Crs, ZkpError, TAG_BIT};
use crate::crypto::{mod_inverse, Ciphertext, PublicKey};
use crate::transport::{Canonical, CodecError, Decoder, Encoder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitProof {
    pub a: [BigUint; 2],
    pub e: [BigUint; 2],
    pub z: [BigUint; 2],
}

fn bit_challenge(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    c: &Ciphertext,
    a: &[BigUint; 2],
) -> BigUint {
    let mut enc = Encoder::new();
    enc.bytes(context).put(pk).put(c).uint(&a[0]).uint(&a[1]);
    hash_challenge(TAG_BIT, crs, &enc.finish())
}

/// `c g^-j mod n^2`.
fn shifted(pk: &PublicKey, c: &Ciphertext, j: usize) -> Option<BigUint> {
    let n2 = pk.n_squared();
    if j == 0 {
        return Some(c.value().clone());
    }
    let g_inv = mod_inverse(pk.g(), n2).ok()?;
    Some((c.value() * g_inv) % n2)
}

/// Encrypt `b` under `r_b` and prove it is a bit.
pub fn prove_bit<R: Rng + ?Sized>(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    b: u8,
    r_b: &BigUint,
    rng: &mut R,
) -> Result<(Ciphertext, BitProof), ZkpError> {
    if b > 1 {
        return Err(ZkpError::InvalidBit);
    }
    let n2 = pk.n_squared();
    let c = pk.encrypt(&BigUint::from(b), r_b)?;
    let real = b as usize;
    let fake = 1 - real;
    let modulus = challenge_modulus();

    let mut a = [BigUint::zero(), BigUint::zero()];
    let mut e = [BigUint::zero(), BigUint::zero()];
    let mut z = [BigUint::zero(), BigUint::zero()];

    // simulated branch: a = z^n u^-e
    let u_fake = shifted(pk, &c, fake).ok_or(ZkpError::NonUnitRandomness)?;
    e[fake] = rng.gen_biguint_below(&modulus);
    z[fake] = pk.random_unit(rng);
    let u_pow = mod_inverse(&u_fake.modpow(&e[fake], n2), n2)?;
    a[fake] = (z[fake].modpow(pk.n(), n2) * u_pow) % n2;

    // real branch commitment
    let s = pk.random_unit(rng);
    a[real] = s.modpow(pk.n(), n2);

    let total = bit_challenge(pk, crs, context, &c, &a);
    e[real] = (&total + &modulus - &e[fake]) % &modulus;
    z[real] = (s * r_b.modpow(&e[real], n2)) % n2;
    Ok((c, BitProof { a, e, z }))
}

pub fn verify_bit(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    c: &Ciphertext,
    proof: &BitProof,
) -> bool {
    let n2 = pk.n_squared();
    let modulus = challenge_modulus();
    if c.key() != pk.id() || c.value().is_zero() || c.value() >= n2 {
        return false;
    }
    let in_range = proof
        .a
        .iter()
        .chain(&proof.z)
        .all(|x| x < n2 && !x.is_zero())
        && proof.e.iter().all(|x| x < &modulus);
    if !in_range {
        return false;
    }
    let total = bit_challenge(pk, crs, context, c, &proof.a);
    if (&proof.e[0] + &proof.e[1]) % &modulus != total {
        return false;
    }
    (0..2).all(|j| {
        let Some(u) = shifted(pk, c, j) else {
            return false;
        };
        let lhs = proof.z[j].modpow(pk.n(), n2);
        let rhs = (&proof.a[j] * u.modpow(&proof.e[j], n2)) % n2;
        lhs == rhs
    })
}

impl Canonical for BitProof {
    fn encode_into(&self, enc: &mut Encoder) {
        for i in 0..2 {
            enc.uint(&self.a[i]).uint(&self.e[i]).uint(&self.z[i]);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let (a0, e0, z0) = (dec.uint()?, dec.uint()?, dec.uint()?);
        let (a1, e1, z1) = (dec.uint()?, dec.uint()?, dec.uint()?);
        Ok(Self {
            a: [a0, a1],
            e: [e0, e1],
            z: [z0, z1],
        })
    }
}
