use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use super::{mod_inverse, CryptoError, KeyId, PublicKey, SecretKey};
use crate::transport::{Canonical, CodecError, Decoder, Encoder};

/// Paillier ciphertext, a unit of `Z*_(n^2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    value: BigUint,
    key: KeyId,
}

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key(&self) -> KeyId {
        self.key
    }

    /// Wrap a raw value, checking that it is a unit mod `n^2`.
    pub fn from_value(pk: &PublicKey, value: BigUint) -> Result<Self, CryptoError> {
        if value >= *pk.n_squared() || value.is_zero() || !value.gcd(pk.n()).is_one() {
            return Err(CryptoError::InvalidCiphertext);
        }
        Ok(Self {
            value,
            key: pk.id(),
        })
    }
}

impl Canonical for Ciphertext {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(self.key.0).uint(&self.value);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let key = KeyId(dec.u64()?);
        let value = dec.uint()?;
        Ok(Self { value, key })
    }
}

/// Plaintext and randomness of a ciphertext, tracked through homomorphic operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub x: BigUint,
    pub r: BigUint,
}

impl Opening {
    pub fn new(x: BigUint, r: BigUint) -> Self {
        Self { x, r }
    }

    /// Opening of `E(x1, r1) E(x2, r2)`: `(x1 + x2, r1 r2)`.
    pub fn add(&self, other: &Opening, pk: &PublicKey) -> Opening {
        Opening {
            x: (&self.x + &other.x) % pk.n(),
            r: (&self.r * &other.r) % pk.n_squared(),
        }
    }

    /// Opening of `E(x, r)^k`: `(k x, r^k)`.
    pub fn smul(&self, k: &BigUint, pk: &PublicKey) -> Opening {
        Opening {
            x: (&self.x * k) % pk.n(),
            r: self.r.modpow(k, pk.n_squared()),
        }
    }
}

impl PublicKey {
    /// `E(x, r) = g^x r^n mod n^2`.
    pub fn encrypt(&self, x: &BigUint, r: &BigUint) -> Result<Ciphertext, CryptoError> {
        if x >= self.n() {
            return Err(CryptoError::InvalidPlaintext);
        }
        self.check_unit(r)?;
        Ok(Ciphertext {
            value: self.encrypt_raw(x, r),
            key: self.id(),
        })
    }

    /// `g^x r^n mod n^2` without range checks; with `g = n + 1`, `g^x = 1 + x n`.
    pub(crate) fn encrypt_raw(&self, x: &BigUint, r: &BigUint) -> BigUint {
        let n2 = self.n_squared();
        let gx = (BigUint::one() + (x % self.n()) * self.n()) % n2;
        (gx * r.modpow(self.n(), n2)) % n2
    }

    pub fn encrypt_opening(&self, o: &Opening) -> Result<Ciphertext, CryptoError> {
        self.encrypt(&o.x, &o.r)
    }

    /// Encrypt with fresh randomness; returns the randomness too.
    pub fn encrypt_fresh<R: Rng + ?Sized>(
        &self,
        x: &BigUint,
        rng: &mut R,
    ) -> Result<(Ciphertext, BigUint), CryptoError> {
        let r = self.random_unit(rng);
        Ok((self.encrypt(x, &r)?, r))
    }

    fn same_key(&self, c: &Ciphertext) -> Result<(), CryptoError> {
        if c.key != self.id() {
            return Err(CryptoError::KeyMismatch);
        }
        Ok(())
    }

    pub fn add(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        self.same_key(c1)?;
        self.same_key(c2)?;
        Ok(Ciphertext {
            value: (&c1.value * &c2.value) % self.n_squared(),
            key: self.id(),
        })
    }

    /// `c1 / c2`, an encryption of `x1 - x2`.
    pub fn sub(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        self.same_key(c2)?;
        let inv = self.inverse(c2)?;
        self.add(c1, &inv)
    }

    pub fn inverse(&self, c: &Ciphertext) -> Result<Ciphertext, CryptoError> {
        self.same_key(c)?;
        Ok(Ciphertext {
            value: mod_inverse(&c.value, self.n_squared())?,
            key: self.id(),
        })
    }

    pub fn smul(&self, c: &Ciphertext, k: &BigUint) -> Result<Ciphertext, CryptoError> {
        self.same_key(c)?;
        Ok(Ciphertext {
            value: c.value.modpow(k, self.n_squared()),
            key: self.id(),
        })
    }

    /// Multiply by `E(0, r)`.
    pub fn rerandomize(&self, c: &Ciphertext, r: &BigUint) -> Result<Ciphertext, CryptoError> {
        let zero = self.encrypt(&BigUint::zero(), r)?;
        self.add(c, &zero)
    }

    /// Product of ciphertexts; `E(0, 1)` for an empty list.
    pub fn sum<'a>(
        &self,
        cs: impl IntoIterator<Item = &'a Ciphertext>,
    ) -> Result<Ciphertext, CryptoError> {
        let mut acc = Ciphertext {
            value: BigUint::one(),
            key: self.id(),
        };
        for c in cs {
            acc = self.add(&acc, c)?;
        }
        Ok(acc)
    }
}

impl SecretKey {
    /// `L(c^lambda mod n^2) * mu mod n` with `L(u) = (u - 1) / n`.
    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigUint, CryptoError> {
        self.check_key(c.key)?;
        let pk = self.public();
        let u = c.value.modpow(self.lambda(), pk.n_squared());
        let l = (u - 1u32) / pk.n();
        Ok((l * &self.mu) % pk.n())
    }

    /// The `r` in `c = E(x, r)`, reduced mod `n`.
    ///
    /// `c g^-x = r^n mod n^2`, so `r mod n` is the n-th root of `c mod n`,
    /// found with `n^-1 mod (p-1)` and `n^-1 mod (q-1)` and joined by CRT.
    pub fn recover_randomness(&self, c: &Ciphertext, x: &BigUint) -> Result<BigUint, CryptoError> {
        if &self.decrypt(c)? != x {
            return Err(CryptoError::PlaintextMismatch);
        }
        let pk = self.public();
        // g^x = 1 + x n = 1 mod n, so c mod n = r^n mod n already.
        Ok(self.nth_root_mod_n(&(c.value() % pk.n())))
    }

    /// Decrypt and recover randomness in one step.
    pub fn open(&self, c: &Ciphertext) -> Result<Opening, CryptoError> {
        let x = self.decrypt(c)?;
        let r = self.recover_randomness(c, &x)?;
        Ok(Opening { x, r })
    }
}
