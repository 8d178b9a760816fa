//! Non-interactive proofs over Paillier ciphertexts.
//!
//! * [`mul`]: `e_gamma` encrypts the product of the plaintexts of `e_alpha`
//!   and `e_beta`.
//! * [`bit`]: a ciphertext encrypts 0 or 1.
//! * [`distributed`]: a rater and the sampling provider jointly produce a
//!   multiplication proof for `E(z b)` without either learning the other's
//!   input.
//!
//! Challenges are SHA-256 over a domain tag, the common random string, a
//! per-transaction context and the public values, truncated to 128 bits.

pub mod bit;
pub mod distributed;
pub mod mul;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crypto::CryptoError;
use crate::transport::Encoder;

pub use bit::{prove_bit, verify_bit, BitProof};
pub use distributed::{
    rater_share, sp1_finalize, sp2_complete, RaterSecrets, RaterShare, Sp2Output, Sp2Secrets,
};
pub use mul::{prove_mul, verify_mul, verify_mul_literal, MulProof, MulStatement, MulWitness};

pub const TAG_MUL: &str = "REP/MUL/u";
pub const TAG_BIT: &str = "REP/BIT/e";
pub const TAG_CRS: &str = "REP/CRS";
pub const CHALLENGE_BITS: u64 = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZkpError {
    #[error("witness does not match the statement")]
    WitnessInconsistent,
    #[error("sampling bit must be 0 or 1")]
    InvalidBit,
    #[error("randomness share is not a unit mod n^2")]
    NonUnitRandomness,
    #[error("decryption failed: {0}")]
    DecryptionFailure(CryptoError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// Common random string, published once by the decrypting provider.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Crs(Vec<u8>);

impl Crs {
    pub fn new(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn from_seed(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(TAG_CRS.as_bytes());
        h.update(seed.to_be_bytes());
        Self(h.finalize().to_vec())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// `SHA-256(tag | crs | statement)` truncated to [`CHALLENGE_BITS`], each
/// input length-prefixed.
pub fn hash_challenge(tag: &str, crs: &Crs, statement: &[u8]) -> BigUint {
    let mut enc = Encoder::new();
    enc.str(tag).bytes(crs.as_bytes()).bytes(statement);
    let digest = Sha256::digest(enc.finish());
    BigUint::from_bytes_be(&digest[..(CHALLENGE_BITS / 8) as usize])
}

/// Multiplication-proof challenge `u` for canonical statement bytes.
pub fn derive_challenge(crs: &Crs, statement: &[u8]) -> BigUint {
    hash_challenge(TAG_MUL, crs, statement)
}

pub(crate) fn challenge_modulus() -> BigUint {
    BigUint::from(1u32) << CHALLENGE_BITS
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn challenge_properties() {
        let crs = Crs::from_seed(1);
        let a = derive_challenge(&crs, b"statement");
        assert_eq!(a, derive_challenge(&crs, b"statement"));
        assert!(a < challenge_modulus());
        assert_ne!(a, derive_challenge(&Crs::from_seed(2), b"statement"));
        assert_ne!(a, hash_challenge(TAG_BIT, &crs, b"statement"));
    }

    #[test]
    fn one_byte_changes_give_distinct_challenges() {
        let crs = Crs::from_seed(7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = HashSet::new();
        for _ in 0..1000 {
            let mut s: Vec<u8> = (0..32).map(|_| rng.gen()).collect();
            let a = derive_challenge(&crs, &s);
            let i = rng.gen_range(0..s.len());
            s[i] ^= 1 << rng.gen_range(0..8);
            let b = derive_challenge(&crs, &s);
            assert_ne!(a, b);
            assert!(seen.insert(a) && seen.insert(b));
        }
    }
}
