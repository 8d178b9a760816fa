//! Damgard-Jurik with `s = 2`: plaintexts in `Z_(n^2)`, ciphertexts mod `n^3`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use super::{CryptoError, KeyId, PublicKey, SecretKey};
use crate::transport::{Canonical, CodecError, Decoder, Encoder};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DjCiphertext {
    value: BigUint,
    key: KeyId,
}

impl DjCiphertext {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn key(&self) -> KeyId {
        self.key
    }

    pub fn from_value(pk: &PublicKey, value: BigUint) -> Result<Self, CryptoError> {
        if value >= *pk.n_cubed() || value.is_zero() || !value.gcd(pk.n()).is_one() {
            return Err(CryptoError::InvalidCiphertext);
        }
        Ok(Self {
            value,
            key: pk.id(),
        })
    }
}

impl Canonical for DjCiphertext {
    fn encode_into(&self, enc: &mut Encoder) {
        enc.u64(self.key.0).uint(&self.value);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let key = KeyId(dec.u64()?);
        let value = dec.uint()?;
        Ok(Self { value, key })
    }
}

impl PublicKey {
    /// `E'(x, r) = (1 + n)^x r^(n^2) mod n^3`.
    pub fn dj_encrypt(&self, x: &BigUint, r: &BigUint) -> Result<DjCiphertext, CryptoError> {
        if x >= self.n_squared() {
            return Err(CryptoError::InvalidPlaintext);
        }
        self.check_unit(r)?;
        let n3 = self.n_cubed();
        let gx = self.g().modpow(x, n3);
        Ok(DjCiphertext {
            value: (gx * r.modpow(self.n_squared(), n3)) % n3,
            key: self.id(),
        })
    }

    pub fn dj_encrypt_fresh<R: Rng + ?Sized>(
        &self,
        x: &BigUint,
        rng: &mut R,
    ) -> Result<(DjCiphertext, BigUint), CryptoError> {
        let r = self.random_unit(rng);
        Ok((self.dj_encrypt(x, &r)?, r))
    }

    fn dj_same_key(&self, c: &DjCiphertext) -> Result<(), CryptoError> {
        if c.key != self.id() {
            return Err(CryptoError::KeyMismatch);
        }
        Ok(())
    }

    pub fn dj_add(
        &self,
        c1: &DjCiphertext,
        c2: &DjCiphertext,
    ) -> Result<DjCiphertext, CryptoError> {
        self.dj_same_key(c1)?;
        self.dj_same_key(c2)?;
        Ok(DjCiphertext {
            value: (&c1.value * &c2.value) % self.n_cubed(),
            key: self.id(),
        })
    }

    pub fn dj_smul(&self, c: &DjCiphertext, k: &BigUint) -> Result<DjCiphertext, CryptoError> {
        self.dj_same_key(c)?;
        Ok(DjCiphertext {
            value: c.value.modpow(k, self.n_cubed()),
            key: self.id(),
        })
    }

    pub fn dj_rerandomize(
        &self,
        c: &DjCiphertext,
        r: &BigUint,
    ) -> Result<DjCiphertext, CryptoError> {
        let zero = self.dj_encrypt(&BigUint::zero(), r)?;
        self.dj_add(c, &zero)
    }
}

impl SecretKey {
    pub fn dj_decrypt(&self, c: &DjCiphertext) -> Result<BigUint, CryptoError> {
        self.check_key(c.key)?;
        let pk = self.public();
        let (n, n2) = (pk.n(), pk.n_squared());
        // a = (1 + n)^(x lambda mod n^2)
        let a = c.value.modpow(self.lambda(), pk.n_cubed());
        // (1 + n)^m = 1 + m n + C(m, 2) n^2  (mod n^3), so
        // L(a) = m + C(m, 2) n (mod n^2) and L(a mod n^2) = m (mod n).
        let l_full = (&a - 1u32) / n;
        let m1 = ((&a % n2) - 1u32) / n % n;
        let two_inv = (n + 1u32) / 2u32;
        let binom = if m1.is_zero() {
            BigUint::zero()
        } else {
            (&m1 * (&m1 - 1u32) % n) * two_inv % n
        };
        let m = (l_full % n2 + n2 - (binom * n) % n2) % n2;
        Ok((m * &self.mu2) % n2)
    }
}
