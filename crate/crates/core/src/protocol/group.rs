//! Transaction tokens in the order-`q` subgroup of `Z*_P`, `P = 2q + 1`.
//!
//! Each party of a transaction picks a secret exponent and publishes
//! `g^r`. Both can then compute the joint token `g^(r_A r_B)`, which names
//! the transaction at the escrow without naming either party.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::ProtocolError;
use crate::crypto::prime;
use crate::crypto::KeyProfile;

/// 2048-bit MODP group from RFC 3526; `(P - 1) / 2` is prime.
const RFC3526_2048: &str = "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f14374fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7edee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf0598da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3be39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf6955817183995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    /// Safe prime modulus `P`.
    pub p: BigUint,
    /// Subgroup order `q = (P - 1) / 2`.
    pub q: BigUint,
    /// Generator of the order-`q` subgroup.
    pub g: BigUint,
}

impl GroupParams {
    /// `g = 4`: a non-trivial square, hence of order exactly `q`.
    pub fn from_safe_prime(p: BigUint) -> Self {
        let q = (&p - 1u32) >> 1u32;
        Self {
            p,
            q,
            g: BigUint::from(4u32),
        }
    }

    pub fn standard() -> Self {
        Self::from_safe_prime(BigUint::parse_bytes(RFC3526_2048.as_bytes(), 16).expect("valid hex"))
    }

    /// 64-bit safe-prime group derived from `seed`.
    pub fn toy(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"REP/GROUP");
        h.update(seed.to_be_bytes());
        let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
        let (p, _) = prime::random_safe_prime(64, 1_000_000, &mut rng)
            .expect("64-bit safe primes are dense enough");
        Self::from_safe_prime(p)
    }

    pub fn for_profile(profile: KeyProfile, seed: u64) -> Self {
        match profile {
            KeyProfile::Toy => Self::toy(seed),
            KeyProfile::Standard => Self::standard(),
        }
    }

    pub fn pow(&self, base: &BigUint, e: &BigUint) -> BigUint {
        base.modpow(e, &self.p)
    }

    /// Uniform exponent in `[1, q)`.
    pub fn random_exponent<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_range(&BigUint::one(), &self.q)
    }

    /// `g^r`, refusing `r = 0 mod q`.
    pub fn token(&self, r: &BigUint) -> Result<BigUint, ProtocolError> {
        if (r % &self.q).is_zero() {
            return Err(ProtocolError::DegenerateExponent);
        }
        Ok(self.pow(&self.g, r))
    }

    /// Whether `x` lies in the order-`q` subgroup and is not the identity.
    pub fn is_token(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.p && !x.is_one() && self.pow(x, &self.q).is_one()
    }
}

/// Both directed tokens of one transaction and their joint value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPair {
    pub r_a: BigUint,
    pub r_b: BigUint,
    pub tok_a: BigUint,
    pub tok_b: BigUint,
    pub joint: BigUint,
}

impl TokenPair {
    pub fn from_exponents(
        group: &GroupParams,
        r_a: BigUint,
        r_b: BigUint,
    ) -> Result<Self, ProtocolError> {
        let tok_a = group.token(&r_a)?;
        let tok_b = group.token(&r_b)?;
        let joint = group.pow(&tok_a, &r_b);
        Ok(Self {
            r_a,
            r_b,
            tok_a,
            tok_b,
            joint,
        })
    }
}

/// Fresh token pair for one transaction.
pub fn token_issue<R: Rng + ?Sized>(group: &GroupParams, rng: &mut R) -> TokenPair {
    let r_a = group.random_exponent(rng);
    let r_b = group.random_exponent(rng);
    TokenPair::from_exponents(group, r_a, r_b).expect("exponents are non-zero")
}
