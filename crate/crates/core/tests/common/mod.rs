//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use num_bigint::{BigUint, RandBigInt};
use rand_chacha::ChaCha8Rng;

use repute::crypto::{Ciphertext, Keypair, PublicKey};
use repute::zkp::distributed::assemble;
use repute::zkp::{
    rater_share, sp1_finalize, sp2_complete, verify_bit, verify_mul, BitProof, Crs, MulProof,
    MulStatement,
};

pub struct Transcript {
    pub c: Ciphertext,
    pub bit: BitProof,
    pub stmt: MulStatement,
    pub proof: MulProof,
}

pub fn distributed(
    kp: &Keypair,
    crs: &Crs,
    ctx: &[u8],
    z: u8,
    b: u8,
    rng: &mut ChaCha8Rng,
) -> Transcript {
    let pk = &kp.public;
    let r_z = pk.random_unit(rng);
    let (share, _) = rater_share(pk, crs, ctx, z, &r_z, rng).unwrap();
    let r_b = pk.random_unit(rng);
    let (out, _) = sp2_complete(pk, crs, ctx, &share, b, &r_b, rng).unwrap();
    let r2 = sp1_finalize(&kp.secret, &out.enc_r2inv).unwrap();
    let (stmt, proof) = assemble(&share, &out, r2);
    Transcript {
        c: out.c,
        bit: out.bit_proof,
        stmt,
        proof,
    }
}

pub fn accepts(pk: &PublicKey, crs: &Crs, ctx: &[u8], t: &Transcript) -> bool {
    t.stmt.e_beta == t.c
        && verify_bit(pk, crs, ctx, &t.c, &t.bit)
        && verify_mul(pk, crs, ctx, &t.stmt, &t.proof)
}

pub const FIELDS: usize = 15;

/// Change field `field` of the transcript to a different valid-looking value.
pub fn mutate(pk: &PublicKey, t: &mut Transcript, field: usize, rng: &mut ChaCha8Rng) {
    let n2 = pk.n_squared();
    let bump = |x: &BigUint, m: &BigUint, rng: &mut ChaCha8Rng| {
        let delta = rng.gen_biguint_range(&BigUint::from(1u32), m);
        (x + delta) % m
    };
    let bump_ct = |c: &Ciphertext, rng: &mut ChaCha8Rng| {
        let mut v = bump(c.value(), n2, rng);
        if v == BigUint::from(0u32) {
            v = BigUint::from(1u32);
        }
        Ciphertext::from_value(pk, v).unwrap()
    };
    let challenge_mod = BigUint::from(1u32) << 128;
    match field {
        0 => t.stmt.e_alpha = bump_ct(&t.stmt.e_alpha, rng),
        1 => t.stmt.e_beta = bump_ct(&t.stmt.e_beta, rng),
        2 => t.stmt.e_gamma = bump_ct(&t.stmt.e_gamma, rng),
        3 => t.proof.e_d = bump_ct(&t.proof.e_d, rng),
        4 => t.proof.e_dbeta = bump_ct(&t.proof.e_dbeta, rng),
        5 => t.proof.v = bump(&t.proof.v, pk.n(), rng),
        6 => t.proof.r1 = bump(&t.proof.r1, n2, rng),
        7 => t.proof.r2 = bump(&t.proof.r2, n2, rng),
        8 => t.c = bump_ct(&t.c, rng),
        9 | 10 => t.bit.a[field - 9] = bump(&t.bit.a[field - 9], n2, rng),
        11 | 12 => t.bit.e[field - 11] = bump(&t.bit.e[field - 11], &challenge_mod, rng),
        13 | 14 => t.bit.z[field - 13] = bump(&t.bit.z[field - 13], n2, rng),
        _ => unreachable!(),
    }
}
