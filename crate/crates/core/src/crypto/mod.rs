//! Paillier and Damgard-Jurik (s = 2) encryption sharing one key pair.
//!
//! Paillier: `E(x, r) = g^x r^n mod n^2` for `x in Z_n`.
//! Damgard-Jurik: `E'(x, r) = g^x r^(n^2) mod n^3` for `x in Z_(n^2)`.
//! Both use `g = n + 1`. Randomness is written out explicitly so the
//! homomorphic identities
//!
//! ```text
//! E(x1, r1) E(x2, r2) = E(x1 + x2, r1 r2)
//! E(x, r)^k           = E(k x, r^k)
//! ```
//!
//! can be checked bit-exactly, and a decryptor can publish `(x, r)` openings.
//!
//! Big-integer arithmetic here is not constant time.

pub mod dj;
pub mod paillier;
pub mod prime;

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::transport::{Canonical, CodecError, Decoder, Encoder};

pub use dj::DjCiphertext;
pub use paillier::{Ciphertext, Opening};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("no prime found after bounded retries")]
    PrimeGenerationFailure,
    #[error("invalid key: {0}")]
    InvalidKey(&'static str),
    #[error("randomness is not a unit")]
    InvalidRandomness,
    #[error("plaintext out of range")]
    InvalidPlaintext,
    #[error("ciphertext is not a unit")]
    InvalidCiphertext,
    #[error("ciphertexts under different keys")]
    KeyMismatch,
    #[error("ciphertext does not decrypt to the claimed plaintext")]
    PlaintextMismatch,
    #[error("value has no inverse")]
    NonUnit,
}

/// Fingerprint of a public modulus, carried by every ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyId(pub u64);

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n2: BigUint,
    n3: BigUint,
    g: BigUint,
    id: KeyId,
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicKey")
            .field("bits", &self.n.bits())
            .field("id", &self.id)
            .finish()
    }
}

impl PublicKey {
    pub fn from_modulus(n: BigUint) -> Self {
        let n2 = &n * &n;
        let n3 = &n2 * &n;
        let g = &n + 1u32;
        let digest = Sha256::digest(n.to_bytes_be());
        let id = KeyId(u64::from_be_bytes(digest[..8].try_into().expect("8 bytes")));
        Self { n, n2, n3, g, id }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n2
    }

    pub fn n_cubed(&self) -> &BigUint {
        &self.n3
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn id(&self) -> KeyId {
        self.id
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    /// Uniform element of `Z*_n`.
    ///
    /// `r^n mod n^2` depends only on `r mod n`, so drawing from `Z*_n` loses
    /// nothing and keeps recovered randomness equal to the drawn value.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        loop {
            let r = rng.gen_biguint_below(&self.n);
            if !r.is_zero() && r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }

    /// Uniform element of `Z_n`.
    pub fn random_plaintext<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_below(&self.n)
    }

    pub(crate) fn check_unit(&self, r: &BigUint) -> Result<(), CryptoError> {
        if r.is_zero() || !r.gcd(&self.n).is_one() {
            return Err(CryptoError::InvalidRandomness);
        }
        Ok(())
    }
}

impl Canonical for PublicKey {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.str("paillier-pk").uint(&self.n);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.expect_tag("paillier-pk")?;
        let n = dec.uint()?;
        if n < BigUint::from(6u32) {
            return Err(CodecError::Malformed("modulus too small".into()));
        }
        Ok(Self::from_modulus(n))
    }
}

#[derive(Clone)]
pub struct SecretKey {
    public: PublicKey,
    p: BigUint,
    q: BigUint,
    lambda: BigUint,
    /// `lambda^-1 mod n`
    mu: BigUint,
    /// `lambda^-1 mod n^2`
    mu2: BigUint,
    /// `n^-1 mod (p-1)` and `n^-1 mod (q-1)`, for n-th roots.
    root_p: BigUint,
    root_q: BigUint,
    /// `p^-1 mod q`, for CRT.
    p_inv_q: BigUint,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl SecretKey {
    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn primes(&self) -> (&BigUint, &BigUint) {
        (&self.p, &self.q)
    }

    pub(crate) fn check_key(&self, id: KeyId) -> Result<(), CryptoError> {
        if id != self.public.id {
            return Err(CryptoError::KeyMismatch);
        }
        Ok(())
    }

    /// `y^(1/n) mod n` for an n-th power residue `y`, by CRT over `p` and `q`.
    pub(crate) fn nth_root_mod_n(&self, y: &BigUint) -> BigUint {
        let a = (y % &self.p).modpow(&self.root_p, &self.p);
        let b = (y % &self.q).modpow(&self.root_q, &self.q);
        // x = a + p * ((b - a) * p^-1 mod q)
        let diff = (&b + &self.q - (&a % &self.q)) % &self.q;
        let h = (diff * &self.p_inv_q) % &self.q;
        a + &self.p * h
    }
}

#[derive(Debug, Clone)]
pub struct Keypair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

impl Keypair {
    /// Build a key pair from two distinct primes.
    pub fn from_primes(p: BigUint, q: BigUint) -> Result<Self, CryptoError> {
        if p == q {
            return Err(CryptoError::InvalidKey("p = q"));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        for x in [&p, &q] {
            if !prime::is_probable_prime(x, prime::MR_ROUNDS, &mut rng) {
                return Err(CryptoError::InvalidKey("factor is not prime"));
            }
        }
        let n = &p * &q;
        let p1 = &p - 1u32;
        let q1 = &q - 1u32;
        if !n.gcd(&(&p1 * &q1)).is_one() {
            return Err(CryptoError::InvalidKey("gcd(n, phi(n)) != 1"));
        }
        let public = PublicKey::from_modulus(n.clone());
        let lambda = p1.lcm(&q1);
        let mu = lambda
            .modinv(&n)
            .ok_or(CryptoError::InvalidKey("lambda not invertible"))?;
        let mu2 = lambda
            .modinv(public.n_squared())
            .ok_or(CryptoError::InvalidKey("lambda not invertible"))?;
        let root_p = (&n % &p1)
            .modinv(&p1)
            .ok_or(CryptoError::InvalidKey("n not invertible mod p-1"))?;
        let root_q = (&n % &q1)
            .modinv(&q1)
            .ok_or(CryptoError::InvalidKey("n not invertible mod q-1"))?;
        let p_inv_q = (&p % &q)
            .modinv(&q)
            .ok_or(CryptoError::InvalidKey("p not invertible mod q"))?;
        let secret = SecretKey {
            public: public.clone(),
            p,
            q,
            lambda,
            mu,
            mu2,
            root_p,
            root_q,
            p_inv_q,
        };
        Ok(Self { public, secret })
    }

    /// Random key with an exactly `bits`-bit modulus.
    pub fn generate<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<Self, CryptoError> {
        if bits < 32 || bits % 2 == 1 {
            return Err(CryptoError::InvalidKey(
                "modulus bits must be even and at least 32",
            ));
        }
        let half = bits / 2;
        let budget = 200 * half as usize;
        for _ in 0..16 {
            let p = prime::random_prime(half, budget, rng)
                .ok_or(CryptoError::PrimeGenerationFailure)?;
            let q = prime::random_prime(half, budget, rng)
                .ok_or(CryptoError::PrimeGenerationFailure)?;
            if let Ok(kp) = Self::from_primes(p, q) {
                return Ok(kp);
            }
        }
        Err(CryptoError::PrimeGenerationFailure)
    }

    /// Key for `profile`, derived deterministically from `seed`.
    pub fn for_profile(profile: KeyProfile, seed: u64) -> Result<Self, CryptoError> {
        let mut h = Sha256::new();
        h.update(b"REP/KEYGEN");
        h.update(seed.to_be_bytes());
        h.update(profile.bits().to_be_bytes());
        Self::generate(
            profile.bits(),
            &mut ChaCha20Rng::from_seed(h.finalize().into()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KeyProfile {
    /// 128-bit modulus: fast tests and exhaustive-style checks. Not secure.
    #[default]
    Toy,
    /// 2048-bit modulus.
    Standard,
}

impl KeyProfile {
    pub fn bits(self) -> u64 {
        match self {
            KeyProfile::Toy => 128,
            KeyProfile::Standard => 2048,
        }
    }
}

impl std::str::FromStr for KeyProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy" => Ok(KeyProfile::Toy),
            "standard" => Ok(KeyProfile::Standard),
            _ => Err(format!(
                "unknown key profile `{s}` (expected toy or standard)"
            )),
        }
    }
}

/// `a^-1 mod m`.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Result<BigUint, CryptoError> {
    (a % m).modinv(m).ok_or(CryptoError::NonUnit)
}
