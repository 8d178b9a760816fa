//! Two-party computation of a multiplication proof for `E(z b)`.
//!
//! The rater knows `z` and `r_z`; the sampling provider knows `b` and `r_b`.
//! Neither learns the other's input, and the decrypting provider only sees
//! `r2^-1` under Damgard-Jurik encryption.
//!
//! ```text
//! rater:  e_z = E(z, r_z), e_d = E(d, r_d), v = u z + d, r1 = r_z^u r_d,
//!         E'(r1, r')
//! sp2:    c = E(b, r_b), e_zb = e_z^b E(0, r_zb), e_db = e_d^b E(0, r_db)
//!         k = (r_b^v)^-1 r_db r_zb^u
//!         b = 1: E'(r1, r')^k E'(0, r'') = E'(r2^-1, .)
//!         b = 0: E'(k, r'')              = E'(r2^-1, .)
//! sp1:    r2 = dec'(.)^-1 mod n^2
//! ```
//!
//! The assembled proof is checked against the statement `(e_z, c, e_zb)`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use super::bit::{prove_bit, BitProof};
use super::mul::{mul_challenge, MulProof, MulStatement};
use super::{Crs, ZkpError};
use crate::crypto::{mod_inverse, Ciphertext, DjCiphertext, PublicKey, SecretKey};
use crate::transport::{Canonical, CodecError, Decoder, Encoder};

/// What the rater sends to the sampling provider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaterShare {
    pub e_z: Ciphertext,
    pub e_d: Ciphertext,
    pub v: BigUint,
    pub r1: BigUint,
    pub enc_r1: DjCiphertext,
}

/// What the rater keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaterSecrets {
    pub z: u8,
    pub r_z: BigUint,
    pub d: BigUint,
    pub r_d: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sp2Output {
    pub c: Ciphertext,
    pub bit_proof: BitProof,
    pub e_zb: Ciphertext,
    pub e_db: Ciphertext,
    pub enc_r2inv: DjCiphertext,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sp2Secrets {
    pub b: u8,
    pub r_b: BigUint,
    pub r_zb: BigUint,
    pub r_db: BigUint,
}

pub fn rater_share<R: Rng + ?Sized>(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    z: u8,
    r_z: &BigUint,
    rng: &mut R,
) -> Result<(RaterShare, RaterSecrets), ZkpError> {
    let (n, n2) = (pk.n(), pk.n_squared());
    let e_z = pk.encrypt(&BigUint::from(z), r_z)?;
    let d = pk.random_plaintext(rng);
    let r_d = pk.random_unit(rng);
    let e_d = pk.encrypt(&d, &r_d)?;
    let u = mul_challenge(pk, crs, context, &e_z, &e_d);
    let v = (&u * BigUint::from(z) + &d) % n;
    let r1 = (r_z.modpow(&u, n2) * &r_d) % n2;
    let (enc_r1, _) = pk.dj_encrypt_fresh(&r1, rng)?;
    let share = RaterShare {
        e_z,
        e_d,
        v,
        r1,
        enc_r1,
    };
    let secrets = RaterSecrets {
        z,
        r_z: r_z.clone(),
        d,
        r_d,
    };
    Ok((share, secrets))
}

/// The sampling provider's half: commit to `b`, blind `e_z` and `e_d` by
/// `b`, and encrypt `r2^-1` under Damgard-Jurik.
pub fn sp2_complete<R: Rng + ?Sized>(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    share: &RaterShare,
    b: u8,
    r_b: &BigUint,
    rng: &mut R,
) -> Result<(Sp2Output, Sp2Secrets), ZkpError> {
    sp2_complete_with(pk, crs, context, share, b, r_b, rng, false)
}

/// [`sp2_complete`] without the `r_zb^u` factor in `k`, so that `r2` fits
/// the check of [`super::verify_mul_literal`] instead of the corrected one.
pub fn sp2_complete_literal<R: Rng + ?Sized>(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    share: &RaterShare,
    b: u8,
    r_b: &BigUint,
    rng: &mut R,
) -> Result<(Sp2Output, Sp2Secrets), ZkpError> {
    sp2_complete_with(pk, crs, context, share, b, r_b, rng, true)
}

#[allow(clippy::too_many_arguments)]
fn sp2_complete_with<R: Rng + ?Sized>(
    pk: &PublicKey,
    crs: &Crs,
    context: &[u8],
    share: &RaterShare,
    b: u8,
    r_b: &BigUint,
    rng: &mut R,
    literal: bool,
) -> Result<(Sp2Output, Sp2Secrets), ZkpError> {
    if b > 1 {
        return Err(ZkpError::InvalidBit);
    }
    let n2 = pk.n_squared();
    let (c, bit_proof) = prove_bit(pk, crs, context, b, r_b, rng)?;
    let b_big = BigUint::from(b);
    let r_zb = pk.random_unit(rng);
    let r_db = pk.random_unit(rng);
    let e_zb = pk.rerandomize(&pk.smul(&share.e_z, &b_big)?, &r_zb)?;
    let e_db = pk.rerandomize(&pk.smul(&share.e_d, &b_big)?, &r_db)?;

    let u = mul_challenge(pk, crs, context, &share.e_z, &share.e_d);
    let rb_v_inv =
        mod_inverse(&r_b.modpow(&share.v, n2), n2).map_err(|_| ZkpError::NonUnitRandomness)?;
    let r_zb_term = if literal {
        BigUint::one()
    } else {
        r_zb.modpow(&u, n2)
    };
    let k = (rb_v_inv * &r_db % n2) * r_zb_term % n2;
    if !k.gcd(pk.n()).is_one() {
        return Err(ZkpError::NonUnitRandomness);
    }
    let fresh = pk.random_unit(rng);
    let enc_r2inv = if b == 1 {
        pk.dj_rerandomize(&pk.dj_smul(&share.enc_r1, &k)?, &fresh)?
    } else {
        pk.dj_encrypt(&k, &fresh)?
    };
    let out = Sp2Output {
        c,
        bit_proof,
        e_zb,
        e_db,
        enc_r2inv,
    };
    let secrets = Sp2Secrets {
        b,
        r_b: r_b.clone(),
        r_zb,
        r_db,
    };
    Ok((out, secrets))
}

/// Decrypt `r2^-1` and invert it mod `n^2`.
pub fn sp1_finalize(sk: &SecretKey, enc_r2inv: &DjCiphertext) -> Result<BigUint, ZkpError> {
    let x = sk
        .dj_decrypt(enc_r2inv)
        .map_err(ZkpError::DecryptionFailure)?;
    if x.is_zero() {
        return Err(ZkpError::NonUnitRandomness);
    }
    mod_inverse(&x, sk.public().n_squared()).map_err(|_| ZkpError::NonUnitRandomness)
}

/// Statement `(e_z, c, e_zb)` and proof `(e_d, e_db, v, r1, r2)`.
pub fn assemble(share: &RaterShare, sp2: &Sp2Output, r2: BigUint) -> (MulStatement, MulProof) {
    (
        MulStatement {
            e_alpha: share.e_z.clone(),
            e_beta: sp2.c.clone(),
            e_gamma: sp2.e_zb.clone(),
        },
        MulProof {
            e_d: share.e_d.clone(),
            e_dbeta: sp2.e_db.clone(),
            v: share.v.clone(),
            r1: share.r1.clone(),
            r2,
        },
    )
}

impl Canonical for RaterShare {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.put(&self.e_z)
            .put(&self.e_d)
            .uint(&self.v)
            .uint(&self.r1)
            .put(&self.enc_r1);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            e_z: dec.get()?,
            e_d: dec.get()?,
            v: dec.uint()?,
            r1: dec.uint()?,
            enc_r1: dec.get()?,
        })
    }
}

impl Canonical for Sp2Output {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.put(&self.c)
            .put(&self.bit_proof)
            .put(&self.e_zb)
            .put(&self.e_db)
            .put(&self.enc_r2inv);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            c: dec.get()?,
            bit_proof: dec.get()?,
            e_zb: dec.get()?,
            e_db: dec.get()?,
            enc_r2inv: dec.get()?,
        })
    }
}

impl Canonical for Sp2Secrets {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(self.b as u64)
            .uint(&self.r_b)
            .uint(&self.r_zb)
            .uint(&self.r_db);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let b = dec.u64()?;
        if b > 1 {
            return Err(CodecError::Malformed("sampling bit".into()));
        }
        Ok(Self {
            b: b as u8,
            r_b: dec.uint()?,
            r_zb: dec.uint()?,
            r_db: dec.uint()?,
        })
    }
}
